#pragma once

#include "semilab/envcore.hpp"
#include "semilab/error.hpp"
#include "semilab/parallel.hpp"

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

namespace semilab::detail {

/// One internal node of the mu-support tree with both posterior rows.
struct NodeView {
  const Word& x;
  const Rational& mu_x;
  const Rational& nu_x;
  const std::vector<Rational>& mu_row;
  const std::vector<Rational>& nu_row;
  /// False when the node is replayed only to rebuild a path prefix.
  bool counted;
};

/// Walks every mu-support path of length n. Acc provides
///   Step step(const NodeView&)
///   void leaf(const Word& x, const Rational& mu_x, const Rational& nu_x, std::span<const Step>)
///   void merge(Acc&&)
/// The tree is cut at a fixed depth; each subtree is one chunk and chunks are
/// merged in lexicographic order, so results do not depend on workers().
template <class Acc>
Acc walk_paths(const Environment& nu, const Environment& mu, std::size_t n, const std::function<Acc()>& make,
               std::size_t node_cap = kDefaultNodeCap) {
  using Step = decltype(std::declval<Acc&>().step(std::declval<const NodeView&>()));
  const std::size_t alphabet = mu.alphabet();
  const std::size_t split = std::min<std::size_t>(n, 3);

  auto rows = [&](const Word& x, const Rational& mu_x, const Rational& nu_x, std::vector<Rational>& mu_child,
                  std::vector<Rational>& nu_child, std::vector<Rational>& mu_row, std::vector<Rational>& nu_row) {
    if (nu_x == 0) {
      throw Error(ErrorCode::undefined_posterior, "nu vanishes at mu-support string '" + x.str() + "'");
    }
    Word child = x;
    for (Symbol a = 0; a < alphabet; ++a) {
      child.push_back(a);
      mu_child[a] = mu.eval(child.symbols());
      nu_child[a] = nu.eval(child.symbols());
      child.pop_back();
      mu_row[a] = mu_child[a] / mu_x;
      nu_row[a] = nu_child[a] / nu_x;
    }
  };

  struct Frame {
    std::vector<Rational> mu_child, nu_child, mu_row, nu_row;
  };

  auto dfs = [&](Acc& acc, Word& x, const Rational& mu_x, const Rational& nu_x, std::vector<Step>& path,
                 std::size_t stop, std::vector<Word>* cut, std::size_t& visited) {
    std::function<void(const Rational&, const Rational&)> rec = [&](const Rational& m, const Rational& v) {
      if (++visited > node_cap) {
        throw Error(ErrorCode::cap_exceeded, "path enumeration exceeded " + std::to_string(node_cap) + " nodes");
      }
      if (x.size() == stop) {
        if (cut) {
          cut->push_back(x);
        } else {
          acc.leaf(x, m, v, std::span<const Step>(path));
        }
        return;
      }
      Frame f{std::vector<Rational>(alphabet), std::vector<Rational>(alphabet), std::vector<Rational>(alphabet),
              std::vector<Rational>(alphabet)};
      rows(x, m, v, f.mu_child, f.nu_child, f.mu_row, f.nu_row);
      path.push_back(acc.step(NodeView{x, m, v, f.mu_row, f.nu_row, true}));
      for (Symbol a = 0; a < alphabet; ++a) {
        if (f.mu_child[a] == 0) continue;
        x.push_back(a);
        rec(f.mu_child[a], f.nu_child[a]);
        x.pop_back();
      }
      path.pop_back();
    };
    rec(mu_x, nu_x);
  };

  Acc head = make();
  std::vector<Word> prefixes;
  {
    Word root(alphabet);
    std::vector<Step> path;
    std::size_t visited = 0;
    const Rational mu_root = mu.eval(root.symbols());
    if (mu_root == 0) return head;
    dfs(head, root, mu_root, nu.eval(root.symbols()), path, split, &prefixes, visited);
  }

  std::vector<Acc> chunks;
  chunks.reserve(prefixes.size());
  for (std::size_t i = 0; i < prefixes.size(); ++i) chunks.push_back(make());
  parallel_for(prefixes.size(), [&](std::size_t i) {
    Acc& acc = chunks[i];
    std::vector<Step> path;
    Frame f{std::vector<Rational>(alphabet), std::vector<Rational>(alphabet), std::vector<Rational>(alphabet),
            std::vector<Rational>(alphabet)};
    for (std::size_t j = 0; j < split; ++j) {
      const Word x = prefixes[i].prefix(j);
      const Rational mu_x = mu.eval(x.symbols());
      const Rational nu_x = nu.eval(x.symbols());
      rows(x, mu_x, nu_x, f.mu_child, f.nu_child, f.mu_row, f.nu_row);
      path.push_back(acc.step(NodeView{x, mu_x, nu_x, f.mu_row, f.nu_row, false}));
    }
    Word x = prefixes[i];
    std::size_t visited = 0;
    dfs(acc, x, mu.eval(x.symbols()), nu.eval(x.symbols()), path, n, nullptr, visited);
  });
  for (auto& c : chunks) head.merge(std::move(c));
  return head;
}

}  // namespace semilab::detail
