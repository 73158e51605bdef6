#include "semilab/word.hpp"

#include "semilab/error.hpp"

#include <algorithm>
#include <charconv>

namespace semilab {

Word::Word(std::size_t alphabet) : alphabet_(alphabet) {
  if (alphabet < 2) throw Error(ErrorCode::invalid_argument, "alphabet size must be at least 2");
}

Word::Word(std::size_t alphabet, std::vector<Symbol> symbols) : Word(alphabet) {
  for (Symbol s : symbols) {
    if (s >= alphabet) throw Error(ErrorCode::invalid_argument, "symbol outside alphabet");
  }
  symbols_ = std::move(symbols);
}

Word Word::parse(std::string_view text, std::size_t alphabet) {
  Word w(alphabet);
  if (text.empty()) return w;
  if (alphabet <= 10) {
    for (char c : text) {
      if (c < '0' || c > '9' || static_cast<std::size_t>(c - '0') >= alphabet) {
        throw Error(ErrorCode::parse, "bad symbol '" + std::string(1, c) + "' in word '" + std::string(text) + "'");
      }
      w.symbols_.push_back(static_cast<Symbol>(c - '0'));
    }
    return w;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto dot = text.find('.', pos);
    if (dot == std::string_view::npos) dot = text.size();
    Symbol s = 0;
    auto part = text.substr(pos, dot - pos);
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), s);
    if (ec != std::errc() || ptr != part.data() + part.size() || s >= alphabet) {
      throw Error(ErrorCode::parse, "bad symbol in word '" + std::string(text) + "'");
    }
    w.symbols_.push_back(s);
    pos = dot + 1;
  }
  return w;
}

Word Word::prefix(std::size_t n) const {
  Word w(alphabet_);
  w.symbols_.assign(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(std::min(n, size())));
  return w;
}

Word Word::extended(Symbol a) const {
  Word w = *this;
  w.push_back(a);
  return w;
}

void Word::push_back(Symbol a) {
  if (a >= alphabet_) throw Error(ErrorCode::invalid_argument, "symbol outside alphabet");
  symbols_.push_back(a);
}

bool Word::is_prefix_of(const Word& other) const {
  return size() <= other.size() && std::equal(symbols_.begin(), symbols_.end(), other.symbols_.begin());
}

std::string Word::str() const {
  std::string out;
  if (alphabet_ <= 10) {
    out.reserve(size());
    for (Symbol s : symbols_) out.push_back(static_cast<char>('0' + s));
    return out;
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(symbols_[i]);
  }
  return out;
}

}  // namespace semilab
