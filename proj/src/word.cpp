#include "freerep/word.hpp"

#include <algorithm>

namespace freerep {

Alphabet::Alphabet(std::vector<std::string> generators) : gens_(std::move(generators)) {
  if (gens_.size() < 2)
    throw std::invalid_argument("alphabet needs at least two generators");
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    const auto& g = gens_[i];
    if (g.empty() || g == "e" || g.find('^') != std::string::npos ||
        g.find('.') != std::string::npos || g.find('|') != std::string::npos)
      throw std::invalid_argument("bad generator name '" + g + "'");
    if (std::find(gens_.begin(), gens_.begin() + static_cast<long>(i), g) !=
        gens_.begin() + static_cast<long>(i))
      throw std::invalid_argument("duplicate generator '" + g + "'");
  }
}

Alphabet Alphabet::standard(int k) {
  // 'e' is reserved for the identity word
  std::vector<std::string> g;
  char c = 'a';
  for (int i = 0; i < k; ++i) {
    if (c == 'e') ++c;
    if (k <= 25 && c <= 'z')
      g.emplace_back(1, c++);
    else
      g.push_back("x" + std::to_string(i + 1));
  }
  return Alphabet(std::move(g));
}

std::string Alphabet::name(Letter a) const {
  if (a < 0 || a >= size()) throw std::out_of_range("letter out of range");
  const auto& g = gens_[static_cast<std::size_t>(a / 2)];
  return (a & 1) ? g + "^-1" : g;
}

std::optional<Letter> Alphabet::find(std::string_view name) const {
  bool inv = false;
  if (name.size() > 3 && name.substr(name.size() - 3) == "^-1") {
    inv = true;
    name.remove_suffix(3);
  }
  for (std::size_t i = 0; i < gens_.size(); ++i)
    if (gens_[i] == name) return static_cast<Letter>(2 * i + (inv ? 1 : 0));
  return std::nullopt;
}

Letter Alphabet::at(std::string_view name) const {
  auto l = find(name);
  if (!l) throw std::invalid_argument("unknown letter '" + std::string(name) + "'");
  return *l;
}

Word::Word(std::span<const Letter> letters) {
  w_.reserve(letters.size());
  for (Letter l : letters) {
    if (!w_.empty() && w_.back() == freerep::inverse(l))
      w_.pop_back();
    else
      w_.push_back(l);
  }
}

Word::Word(std::initializer_list<Letter> letters)
    : Word(std::span<const Letter>(letters.begin(), letters.size())) {}

Word Word::inverse() const {
  Word r;
  r.w_.resize(w_.size());
  std::transform(w_.rbegin(), w_.rend(), r.w_.begin(),
                 [](Letter l) { return freerep::inverse(l); });
  return r;
}

Word Word::times(Letter a) const {
  Word r = *this;
  if (!r.w_.empty() && r.w_.back() == freerep::inverse(a))
    r.w_.pop_back();
  else
    r.w_.push_back(a);
  return r;
}

Word Word::operator*(const Word& y) const { return multiply(*this, y); }

Word multiply(const Word& x, const Word& y) {
  const auto& a = x.letters();
  const auto& b = y.letters();
  std::size_t c = 0;
  while (c < a.size() && c < b.size() && a[a.size() - 1 - c] == inverse(b[c])) ++c;
  std::vector<Letter> out(a.begin(), a.end() - static_cast<long>(c));
  out.insert(out.end(), b.begin() + static_cast<long>(c), b.end());
  return Word(out);  // already reduced, the constructor keeps it as is
}

Word multiply(const Alphabet& alpha, const Word& x, const Word& y) {
  auto check = [&](const Word& w) {
    for (Letter l : w.letters())
      if (l < 0 || l >= alpha.size())
        throw std::invalid_argument("word uses a letter outside the alphabet");
  };
  check(x);
  check(y);
  return multiply(x, y);
}

int common_prefix(const Word& x, const Word& y) noexcept {
  const auto& a = x.letters();
  const auto& b = y.letters();
  auto m = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
  return static_cast<int>(m.first - a.begin());
}

int distance(const Word& x, const Word& y) noexcept {
  return x.length() + y.length() - 2 * common_prefix(x, y);
}

bool in_cone(const Word& x, const Word& y) noexcept {
  return x.length() <= y.length() && common_prefix(x, y) == x.length();
}

bool in_halftree(const Word& x, const Word& xa, const Word& y) {
  if (distance(x, xa) != 1) throw std::invalid_argument("in_halftree: vertices not adjacent");
  return distance(y, xa) < distance(y, x);
}

std::string format(const Alphabet& alpha, const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (int i = 0; i < w.length(); ++i) {
    if (i) s += '.';
    s += alpha.name(w[i]);
  }
  return s;
}

Word parse_word(const Alphabet& alpha, std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty() || text == "e") return Word{};
  std::vector<Letter> ls;
  while (!text.empty()) {
    auto dot = text.find('.');
    auto tok = trim(text.substr(0, dot));
    ls.push_back(alpha.at(tok));
    if (dot == std::string_view::npos) break;
    text.remove_prefix(dot + 1);
  }
  return Word(ls);
}

std::uint64_t sphere_size(int letters, int n) {
  if (n == 0) return 1;
  std::uint64_t s = static_cast<std::uint64_t>(letters);
  for (int i = 1; i < n; ++i) s *= static_cast<std::uint64_t>(letters - 1);
  return s;
}

}  // namespace freerep
