#include <doctest.h>

#include <set>

#include "freerep/word.hpp"
#include "support.hpp"

using namespace freerep;

TEST_CASE("alphabet naming and lookup") {
  Alphabet A = Alphabet::standard(2);
  CHECK(A.size() == 4);
  CHECK(A.name(0) == "a");
  CHECK(A.name(1) == "a^-1");
  CHECK(A.name(3) == "b^-1");
  CHECK(A.at("b^-1") == 3);
  CHECK_FALSE(A.find("c").has_value());
  CHECK_THROWS(A.at("c"));
  Alphabet M({"x1", "long"});
  CHECK(M.at("long^-1") == 3);
}

TEST_CASE("words reduce on construction and multiplication") {
  Word w{0, 2, 3, 1};  // a b b^-1 a^-1
  CHECK(w.empty());
  Word x{0, 2};
  CHECK(multiply(x, x.inverse()).empty());
  CHECK(multiply(x.inverse(), x).empty());
  Word y{3, 1};
  CHECK((x * y).empty());
  CHECK(x.times(2).length() == 3);
  CHECK(x.times(3).length() == 1);
  Alphabet A = Alphabet::standard(2);
  CHECK(format(A, Word{}) == "e");
  CHECK(format(A, Word{0, 3}) == "a.b^-1");
  CHECK(parse_word(A, "a.b^-1") == Word{0, 3});
  CHECK(parse_word(A, "e").empty());
  CHECK(parse_word(A, "a.a^-1").empty());
  CHECK_THROWS_AS(parse_word(A, "a.q"), std::invalid_argument);
  CHECK_THROWS(multiply(A, Word{}, Word{7}));
}

TEST_CASE("group laws on random words") {
  std::mt19937_64 rng(5);
  auto rw = [&](int n) {
    std::vector<Letter> l;
    for (int i = 0; i < n; ++i) l.push_back(static_cast<Letter>(rng() % 6));
    return Word(l);
  };
  for (int t = 0; t < 200; ++t) {
    Word x = rw(6), y = rw(5), z = rw(4);
    CHECK((x * y) * z == x * (y * z));
    CHECK((x * y).inverse() == y.inverse() * x.inverse());
    CHECK(distance(x, y) == (x.inverse() * y).length());
    CHECK(distance(x, y) == distance(y, x));
  }
}

TEST_CASE("cones and half-trees") {
  Word a{0}, ab{0, 2};
  CHECK(in_cone(a, ab));
  CHECK_FALSE(in_cone(ab, a));
  CHECK(in_cone(Word{}, ab));
  // edge (e, a): the half-tree on the a side is the cone of a
  CHECK(in_halftree(Word{}, a, ab));
  CHECK_FALSE(in_halftree(Word{}, a, Word{2}));
  // reversed edge (a, e): everything outside the cone of a
  CHECK(in_halftree(a, Word{}, Word{2}));
  CHECK_FALSE(in_halftree(a, Word{}, ab));
  CHECK_THROWS(in_halftree(Word{}, ab, a));
}

TEST_CASE("sphere enumeration matches the odometer oracle") {
  for (int L : {4, 6}) {
    for (int n = 0; n <= 5; ++n) {
      std::set<std::vector<Letter>> lib;
      std::uint64_t count = 0;
      for_each_in_sphere(L, n, [&](const std::vector<Letter>& w) {
        lib.insert(w);
        ++count;
      });
      auto ref = oracle::sphere(L, n);
      CHECK(count == ref.size());
      CHECK(lib == std::set<std::vector<Letter>>(ref.begin(), ref.end()));
      CHECK(sphere_size(L, n) == ref.size());
    }
  }
  // 2k (2k-1)^(n-1)
  CHECK(sphere_size(4, 12) == 4ull * 177147ull);
  std::uint64_t restricted = 0;
  for_each_in_sphere(4, 4, [&](const std::vector<Letter>& w) { restricted += w.front() == 2; }, 2);
  CHECK(restricted == 27);
}
