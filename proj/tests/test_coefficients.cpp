#include <doctest.h>

#include "freerep/coefficients.hpp"
#include "support.hpp"

using namespace freerep;

namespace {

MultiplicativeFunction mf(const MatrixSystem& sys, const std::vector<EdgeTerm>& ts) {
  int N = 0;
  for (const auto& t : ts) N = std::max(N, native_depth(t));
  return canonicalize(sys, ts, N);
}

std::vector<oracle::Term> as_terms(const std::vector<EdgeTerm>& ts) {
  std::vector<oracle::Term> out;
  for (const auto& t : ts) out.push_back({t.tail.letters(), t.letter, t.value});
  return out;
}

Vec one() { return Vec::Ones(1); }

}  // namespace

TEST_CASE("mu evaluation by hand") {
  auto ns = normalize(endpoint_system(2));
  const auto& sys = ns.system;
  CHECK(std::abs(mu_eval(sys, Word{}, 0, one(), Word{0})(0) - 1.0) < 1e-15);
  CHECK(std::abs(mu_eval(sys, Word{}, 0, one(), Word{0, 2})(0) - 1 / std::sqrt(3.0)) < 1e-15);
  CHECK(mu_eval(sys, Word{}, 0, one(), Word{2}).norm() == 0.0);
  std::mt19937_64 rng(41);
  auto r = normalize(random_system(2, {2, 2, 2, 2}, rng));
  Vec v = oracle::random_vec(2, rng);
  // μ[a^-1, e, v] at a: one step H_aa past the edge
  CHECK((mu_eval(r.system, Word{1}, 0, v, Word{0}) - r.h(0, 0) * v).norm() < 1e-14);
}

TEST_CASE("canonical coefficients at depths 1 and 2") {
  auto ns = normalize(endpoint_system(2));
  const auto& sys = ns.system;
  auto f1 = canonicalize(sys, std::vector<EdgeTerm>{{Word{}, 0, one()}}, 0);
  CHECK(f1.coeffs.size() == 1);
  auto f2 = canonicalize(sys, std::vector<EdgeTerm>{{Word{}, 0, one()}}, 1);
  CHECK(f2.coeffs.size() == 3);
  for (const auto& [head, v] : f2.coeffs) {
    CHECK(head.length() == 2);
    CHECK(head[0] == 0);
    CHECK(std::abs(v(0) - 1 / std::sqrt(3.0)) < 1e-15);
  }
  // μ[a^-1, e, 1] at depth 0: edges (e, c), c ≠ a^-1
  auto g = canonicalize(sys, std::vector<EdgeTerm>{{Word{1}, 0, one()}}, 0);
  CHECK(g.coeffs.size() == 3);
  CHECK(g.coeffs.count(Word{1}) == 0);
  for (const auto& [head, v] : g.coeffs) CHECK(std::abs(v(0) - 1 / std::sqrt(3.0)) < 1e-15);
}

TEST_CASE("S0 inner products by hand") {
  auto ns = normalize(endpoint_system(2));
  const auto& sys = ns.system;
  auto v = mf(sys, {{Word{}, 0, one()}});
  CHECK(std::abs(inner_product(ns, v, v) - 1.0) < 1e-14);
  auto av = act(sys, Word{1}, v);
  CHECK(std::abs(inner_product(ns, v, av) - 1 / std::sqrt(3.0)) < 1e-14);
  CHECK(std::abs(inner_product(ns, v, act(sys, Word{2}, v))) < 1e-15);
  CHECK(std::abs(norm(ns, act(sys, Word{0, 2}, v)) - 1.0) < 1e-14);
  // disjoint half-trees
  auto w = mf(sys, {{Word{}, 2, one()}});
  CHECK(std::abs(inner_product(ns, v, w)) == 0.0);
  // indicator of Γ(a) kills μ[e, b, v]
  CHECK(act_indicator(sys, Word{0}, w).coeffs.empty());
  CHECK(act(sys, Word{}, v).coeffs == v.coeffs);
}

TEST_CASE("inner products agree with the edge-sum oracle") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 3; ++t) {
    auto ns = normalize(random_system(2, {1, 2, 2, 1}, rng));
    const auto& sys = ns.system;
    std::vector<EdgeTerm> f{{Word{}, 0, oracle::random_vec(1, rng)}, {Word{2}, 0, oracle::random_vec(1, rng)},
                            {Word{0}, 1, oracle::random_vec(2, rng)}};
    std::vector<EdgeTerm> g{{Word{3}, 1, oracle::random_vec(2, rng)}, {Word{}, 2, oracle::random_vec(2, rng)}};
    const cplx lib = inner_product(ns, mf(sys, f), mf(sys, g));
    const cplx ref = oracle::inner(ns, as_terms(f), as_terms(g), 3);
    CHECK(std::abs(lib - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
    const cplx ref2 = oracle::inner(ns, as_terms(f), as_terms(g), 4);
    CHECK(std::abs(ref2 - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("unitarity, depth invariance and symmetry") {
  std::mt19937_64 rng(43);
  auto ns = normalize(random_system(3, {1, 2, 1, 1, 2, 1}, rng));
  const auto& sys = ns.system;
  auto f = mf(sys, {{Word{}, 0, oracle::random_vec(1, rng)}, {Word{4}, 3, oracle::random_vec(1, rng)}});
  auto g = mf(sys, {{Word{2}, 2, oracle::random_vec(1, rng)}, {Word{}, 5, oracle::random_vec(1, rng)}});
  const cplx base = inner_product(ns, f, g);
  for (int t = 0; t < 10; ++t) {
    std::vector<Letter> l;
    const int len = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < len; ++i) l.push_back(static_cast<Letter>(rng() % 6));
    Word y(l);
    CHECK(std::abs(inner_product(ns, act(sys, y, f), act(sys, y, g)) - base) < 1e-11);
    // ⟨f, π(y) g⟩ = conj ⟨g, π(y^-1) f⟩
    const cplx p = inner_product(ns, f, act(sys, y, g));
    const cplx q = inner_product(ns, g, act(sys, y.inverse(), f));
    CHECK(std::abs(p - std::conj(q)) < 1e-11);
  }
  auto fN = canonicalize(sys, f, f.depth + 2);
  auto gN = canonicalize(sys, g, g.depth + 2);
  CHECK(std::abs(inner_product(ns, fN, gN) - base) < 1e-11);
}

TEST_CASE("dense edge space matches the sparse representation") {
  std::mt19937_64 rng(44);
  auto ns = normalize(random_system(2, {2, 1, 1, 2}, rng));
  const auto& sys = ns.system;
  auto f = mf(sys, {{Word{}, 0, oracle::random_vec(2, rng)}, {Word{1}, 2, oracle::random_vec(1, rng)}});
  auto g = mf(sys, {{Word{3}, 1, oracle::random_vec(1, rng)}});
  const int N = 2;
  EdgeSpace W(sys.dims, N), W1(sys.dims, N + 1);
  Vec fd = W.to_dense(canonicalize(sys, f, N));
  Vec gd = W.to_dense(canonicalize(sys, g, N));
  Mat G = W.gram(ns.forms);
  CHECK(std::abs(fd.dot(G * gd) - inner_product(ns, f, g)) < 1e-12);
  Word y{2};
  Mat P = pi_matrix(sys, y, W, W1);
  Vec lhs = P * gd;
  Vec rhs = W1.to_dense(canonicalize(sys, act(sys, y, g), N + 1));
  CHECK((lhs - rhs).norm() < 1e-12);
  auto back = W.from_dense(fd);
  CHECK(std::abs(inner_product(ns, back, f) - inner_product(ns, f, f)) < 1e-12);
}
