#include <doctest.h>

#include "freerep/twin.hpp"
#include "support.hpp"

using namespace freerep;

TEST_CASE("twin data transform is an involution") {
  std::mt19937_64 rng(21);
  auto sys = random_system(3, {1, 2, 3, 1, 2, 2}, rng);
  auto tw = twin_system(sys);
  // V̂_a = V*_{a^-1}
  for (Letter a = 0; a < 6; ++a) CHECK(tw.dim(a) == sys.dim(inverse(a)));
  for (Letter b = 0; b < 6; ++b)
    for (Letter a = 0; a < 6; ++a) {
      if (b == inverse(a)) continue;
      CHECK(rel_diff(tw.h(b, a), sys.h(inverse(a), inverse(b)).adjoint()) == 0.0);
    }
  auto back = twin_system(tw);
  for (std::size_t i = 0; i < sys.H.size(); ++i) CHECK(rel_diff(back.H[i], sys.H[i]) == 0.0);
}

TEST_CASE("twin of twin is equivalent with an invertible K") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 5; ++t) {
    auto ns = normalize(random_system(2, {1, 2, 2, 1}, rng));
    auto tw = twin(ns);
    auto tt = twin(tw);
    auto eq = solve_equivalence(ns, tt);
    REQUIRE(eq.status == EquivalenceStatus::equivalent);
    REQUIRE(eq.K.has_value());
    for (const auto& K : *eq.K) CHECK(K.fullPivLu().isInvertible());
    CHECK(k_intertwining_residual(ns.system, tt.system, *eq.K) < 1e-9);
  }
}

TEST_CASE("equivalence detects conjugated copies and rejects random pairs") {
  std::mt19937_64 rng(23);
  auto sys = random_system(2, {2, 2, 1, 1}, rng);
  auto c = oracle::conjugated(sys, rng);
  auto eq = solve_equivalence(sys, c);
  CHECK(eq.status == EquivalenceStatus::equivalent);
  CHECK(eq.solution_space_dim == 1);  // Schur: unique up to scale
  auto other = random_system(2, {2, 2, 1, 1}, rng);
  CHECK(solve_equivalence(sys, other).status == EquivalenceStatus::inequivalent);
  // different dimension vectors are never equivalent
  auto shape = random_system(2, {2, 1, 2, 1}, rng);
  CHECK(solve_equivalence(sys, shape).status == EquivalenceStatus::inequivalent);
}

TEST_CASE("E maps: shapes and the adjoint relation") {
  std::mt19937_64 rng(24);
  auto ns = normalize(random_system(2, {1, 2, 2, 3}, rng));
  auto pkg = make_twin_package(ns);
  const int L = 4;
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      const Mat& E = pkg.e(a, b);
      CHECK(E.rows() == pkg.twin.dim(a));
      CHECK(E.cols() == ns.dim(b));
      if (a == inverse(b)) {
        CHECK(E.norm() == 0.0);
        continue;
      }
      // E_ab = Σ_{c ≠ a, b^-1} Ĥ_{a c^-1} B_c H_cb
      Mat ref = Mat::Zero(E.rows(), E.cols());
      for (Letter c = 0; c < L; ++c)
        if (c != a && c != inverse(b)) ref += pkg.twin.h(a, inverse(c)) * ns.B(c) * ns.h(c, b);
      CHECK(rel_diff(E, ref) < 1e-12);
    }
  CHECK(e_adjoint_residual(pkg) < 1e-12);
}

TEST_CASE("twin-symmetric systems are their own twin with unitary K") {
  std::mt19937_64 rng(25);
  auto ns = normalize(random_twin_symmetric(2, {2, 2, 1, 1}, rng));
  auto pkg = make_twin_package(ns);
  REQUIRE(pkg.twins_equivalent());
  REQUIRE(pkg.K.has_value());
  CHECK(pkg.K->form_unitary);
  CHECK(pkg.K->unitarity_residual < 1e-9);
  for (Letter a = 0; a < 4; ++a) CHECK(rel_diff(pkg.K->K[static_cast<std::size_t>(a)].adjoint(), pkg.K->K[static_cast<std::size_t>(inverse(a))]) < 1e-9);
}
