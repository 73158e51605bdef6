#include "semilab/verdict.hpp"

namespace semilab {

const char* to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::holds: return "certified-holds";
    case Outcome::fails: return "certified-fails";
    case Outcome::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

nlohmann::json interval_json(const Interval& x) { return {{"lo", x.lo_string()}, {"hi", x.hi_string()}}; }

nlohmann::json Verdict::to_json() const {
  return {{"label", label},
          {"outcome", to_string(outcome)},
          {"lhs", interval_json(lhs)},
          {"rhs", interval_json(rhs)},
          {"precision", precision},
          {"exact", exact}};
}

Verdict compare_le(std::string label, const Interval& lhs, const Interval& rhs) {
  Verdict v{std::move(label), Outcome::inconclusive, lhs, rhs, std::max(lhs.precision(), rhs.precision()), false};
  if (lhs.certainly_le(rhs)) {
    v.outcome = Outcome::holds;
  } else if (lhs.certainly_gt(rhs)) {
    v.outcome = Outcome::fails;
  }
  return v;
}

Verdict compare_le_exact(std::string label, const Rational& lhs, const Rational& rhs, mpfr_prec_t precision) {
  Verdict v{std::move(label), lhs <= rhs ? Outcome::holds : Outcome::fails,
            Interval(lhs, precision), Interval(rhs, precision), precision, true};
  return v;
}

Verdict certify_le(std::string label, const std::function<IntervalPair(mpfr_prec_t)>& sides, mpfr_prec_t start,
                   mpfr_prec_t cap) {
  mpfr_prec_t prec = start;
  for (;;) {
    auto [lhs, rhs] = sides(prec);
    Verdict v = compare_le(label, lhs, rhs);
    v.precision = prec;
    if (v.outcome != Outcome::inconclusive || prec * 2 > cap) return v;
    prec *= 2;
  }
}

Outcome combine(const std::vector<Verdict>& verdicts) {
  bool inconclusive = false;
  for (const auto& v : verdicts) {
    if (v.outcome == Outcome::fails) return Outcome::fails;
    if (v.outcome == Outcome::inconclusive) inconclusive = true;
  }
  return inconclusive ? Outcome::inconclusive : Outcome::holds;
}

int exit_code(Outcome o) noexcept {
  switch (o) {
    case Outcome::holds: return 0;
    case Outcome::fails: return 2;
    case Outcome::inconclusive: return 3;
  }
  return 3;
}

}  // namespace semilab
