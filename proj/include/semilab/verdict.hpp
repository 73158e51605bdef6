#pragma once

#include "semilab/interval.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace semilab {

enum class Outcome { holds, fails, inconclusive };

/// "certified-holds", "certified-fails", "inconclusive".
const char* to_string(Outcome o) noexcept;

/// Result of checking lhs <= rhs. holds iff lhs.hi <= rhs.lo, fails iff
/// lhs.lo > rhs.hi. `exact` marks comparisons decided in rational arithmetic,
/// whose intervals are then points or enclosures of the exact operands.
struct Verdict {
  std::string label;
  Outcome outcome = Outcome::inconclusive;
  Interval lhs;
  Interval rhs;
  mpfr_prec_t precision = kDefaultPrecision;
  bool exact = false;

  bool holds() const noexcept { return outcome == Outcome::holds; }
  nlohmann::json to_json() const;
};

Verdict compare_le(std::string label, const Interval& lhs, const Interval& rhs);

/// Verdict from an exact comparison lhs <= rhs of rationals.
Verdict compare_le_exact(std::string label, const Rational& lhs, const Rational& rhs,
                         mpfr_prec_t precision = kDefaultPrecision);

using IntervalPair = std::pair<Interval, Interval>;

/// Evaluates both sides at `start` bits, doubling up to `cap` while the
/// comparison is inconclusive.
Verdict certify_le(std::string label, const std::function<IntervalPair(mpfr_prec_t)>& sides,
                   mpfr_prec_t start = kDefaultPrecision, mpfr_prec_t cap = kMaxPrecision);

/// holds if all hold, else fails if any fails, else inconclusive.
Outcome combine(const std::vector<Verdict>& verdicts);

/// 0 = all hold, 2 = any fails, 3 = any inconclusive.
int exit_code(Outcome o) noexcept;

nlohmann::json interval_json(const Interval& x);

}  // namespace semilab
