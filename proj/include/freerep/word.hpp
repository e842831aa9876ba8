#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace freerep {

// Letters are small integers: generator i is 2i, its inverse 2i+1.
using Letter = int;

constexpr Letter inverse(Letter a) noexcept { return a ^ 1; }

class Alphabet {
public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> generators);

  // a, b, c, ... (x1, x2, ... beyond 26)
  static Alphabet standard(int k);

  int rank() const noexcept { return static_cast<int>(gens_.size()); }
  int size() const noexcept { return 2 * rank(); }
  const std::vector<std::string>& generators() const noexcept { return gens_; }

  std::string name(Letter a) const;  // "a" or "a^-1"
  std::optional<Letter> find(std::string_view name) const;
  Letter at(std::string_view name) const;  // throws on unknown names

  bool operator==(const Alphabet&) const = default;

private:
  std::vector<std::string> gens_;
};

// Reduced word. Construction always reduces; letters are not range-checked
// here, use the Alphabet-aware helpers below for untrusted input.
class Word {
public:
  Word() = default;
  explicit Word(std::span<const Letter> letters);
  Word(std::initializer_list<Letter> letters);

  const std::vector<Letter>& letters() const noexcept { return w_; }
  int length() const noexcept { return static_cast<int>(w_.size()); }
  bool empty() const noexcept { return w_.empty(); }
  Letter front() const { return w_.front(); }
  Letter back() const { return w_.back(); }
  Letter operator[](int i) const { return w_[static_cast<std::size_t>(i)]; }

  Word inverse() const;
  // reduced x·a
  Word times(Letter a) const;
  Word operator*(const Word& y) const;

  auto operator<=>(const Word&) const = default;
  bool operator==(const Word&) const = default;

private:
  std::vector<Letter> w_;
};

Word multiply(const Word& x, const Word& y);
// Same, but rejects letters outside the alphabet.
Word multiply(const Alphabet& alpha, const Word& x, const Word& y);

int common_prefix(const Word& x, const Word& y) noexcept;
int distance(const Word& x, const Word& y) noexcept;

// y starts with x
bool in_cone(const Word& x, const Word& y) noexcept;
// y strictly closer to xa than to x; throws if x, xa are not adjacent
bool in_halftree(const Word& x, const Word& xa, const Word& y);

std::string format(const Alphabet& alpha, const Word& w);
// "e", "a", "a.b^-1.a" ; throws std::invalid_argument
Word parse_word(const Alphabet& alpha, std::string_view text);

std::uint64_t sphere_size(int letters, int n);

// Iterative last-letter-restricted DFS over the sphere of radius n, in
// lexicographic letter order. visit(const std::vector<Letter>&) sees each
// reduced word once. With first >= 0 only words starting with `first`.
template <class Visit>
void for_each_in_sphere(int letters, int n, Visit&& visit, Letter first = -1) {
  std::vector<Letter> w;
  if (n == 0) {
    if (first < 0) visit(w);
    return;
  }
  w.reserve(static_cast<std::size_t>(n));
  std::vector<Letter> next(static_cast<std::size_t>(n), 0);
  int depth = 0;
  next[0] = first >= 0 ? first : 0;
  const Letter stop0 = first >= 0 ? first + 1 : letters;
  while (depth >= 0) {
    Letter& c = next[static_cast<std::size_t>(depth)];
    const Letter stop = depth == 0 ? stop0 : letters;
    if (depth > 0 && c < stop && c == inverse(w.back())) ++c;
    if (c >= stop) {
      --depth;
      if (depth >= 0) w.pop_back();
      continue;
    }
    w.push_back(c++);
    if (depth + 1 == n) {
      visit(static_cast<const std::vector<Letter>&>(w));
      w.pop_back();
    } else {
      ++depth;
      next[static_cast<std::size_t>(depth)] = 0;
    }
  }
}

}  // namespace freerep
