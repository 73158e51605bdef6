#pragma once

#include "semilab/environment.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semilab {

/// nu(a|x) for each symbol a.
struct PosteriorVec {
  std::vector<Rational> entries;

  Rational sum() const;
};

/// Throws undefined_posterior when nu(x) = 0.
PosteriorVec posterior(const Environment& env, const Word& x);

struct ValidationReport {
  std::size_t depth = 0;
  bool is_semimeasure = true;
  bool is_measure_to_depth = true;
  std::optional<Word> first_defect_node;
  std::string defect;
  std::optional<Word> first_measure_defect;
  std::size_t nodes_checked = 0;
};

/// Exact check of 0 <= nu(x) <= 1 and nu(x) >= sum_a nu(xa) on every node of
/// length < depth, plus equality and nu(epsilon) = 1 for the measure flag.
ValidationReport validate(const Environment& env, std::size_t depth);

inline constexpr std::size_t kDefaultNodeCap = std::size_t{1} << 25;

/// Length-`depth` strings with nonzero mass, lexicographic order. Zero
/// subtrees are pruned, so sparse supports can go deep. Throws cap_exceeded
/// after visiting node_cap nodes.
void for_each_support(const Environment& env, std::size_t depth,
                      const std::function<void(const Word&, const Rational&)>& visit,
                      std::size_t node_cap = kDefaultNodeCap);

/// Same, restricted to extensions of `prefix`.
void for_each_support(const Environment& env, const Word& prefix, std::size_t depth,
                      const std::function<void(const Word&, const Rational&)>& visit,
                      std::size_t node_cap = kDefaultNodeCap);

std::vector<std::pair<Word, Rational>> enumerate_support(const Environment& env, std::size_t depth,
                                                         std::size_t node_cap = kDefaultNodeCap);

/// Largest depth <= requested whose dense tree has at most 2^16 nodes.
std::size_t default_cert_depth(std::size_t alphabet, std::size_t requested);

/// Counter-based 64-bit generator: word i of stream s is a mix of (s, i), so
/// any word can be regenerated without replaying the stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t next() { return at(counter_++); }
  std::uint64_t at(std::uint64_t counter) const;
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

struct Sample {
  Word word;
  Rational likelihood;
};

/// Draws omega_{1:length} symbol by symbol. Each symbol is chosen by refining a
/// dyadic interval of uniform bits until it sits inside one cell of the exact
/// posterior CDF, so no rounding enters the draw.
Sample sample(const Environment& env, std::size_t length, std::uint64_t seed,
              std::optional<std::size_t> cert_depth = std::nullopt);

}  // namespace semilab
