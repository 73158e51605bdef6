#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semilab {

using Symbol = std::uint32_t;

/// A finite string over the alphabet {0, ..., alphabet-1}. The empty word is
/// the empty string.
class Word {
 public:
  explicit Word(std::size_t alphabet = 2);
  Word(std::size_t alphabet, std::vector<Symbol> symbols);

  /// Digits for alphabets up to 10 ("0110"), dot-separated indices otherwise
  /// ("3.11.0"). The empty text is the empty word.
  static Word parse(std::string_view text, std::size_t alphabet);

  std::size_t alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const Symbol> symbols() const noexcept { return symbols_; }

  Word prefix(std::size_t n) const;
  Word extended(Symbol a) const;
  void push_back(Symbol a);
  void pop_back() { symbols_.pop_back(); }
  bool is_prefix_of(const Word& other) const;

  std::string str() const;

  /// Symbol-wise lexicographic order; the alphabet is not compared.
  friend std::strong_ordering operator<=>(const Word& a, const Word& b) {
    return a.symbols_ <=> b.symbols_;
  }
  friend bool operator==(const Word& a, const Word& b) {
    return a.alphabet_ == b.alphabet_ && a.symbols_ == b.symbols_;
  }

 private:
  std::size_t alphabet_;
  std::vector<Symbol> symbols_;
};

}  // namespace semilab
