#pragma once

// Shared fixtures and brute-force oracles for the unit tests. The oracles
// work from definitions (explicit sums over spheres of the tree) and do not
// use the library's canonicalization or memoized kernels.

#include <random>
#include <vector>

#include "freerep/coefficients.hpp"
#include "freerep/instances.hpp"
#include "freerep/matrix_system.hpp"

namespace oracle {

using namespace freerep;

inline Vec random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (auto& x : v) x = cplx(nd(rng), nd(rng));
  return v;
}

inline Mat random_mat(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(nd(rng), nd(rng));
  return m;
}

// All reduced words of length n, written out with an explicit stack-free
// odometer rather than the library walker.
inline std::vector<std::vector<Letter>> sphere(int L, int n) {
  std::vector<std::vector<Letter>> out;
  if (n == 0) return {{}};
  std::vector<Letter> w(static_cast<std::size_t>(n), 0);
  while (true) {
    bool reduced = true;
    for (int i = 1; i < n; ++i)
      if (w[static_cast<std::size_t>(i)] == (w[static_cast<std::size_t>(i) - 1] ^ 1)) reduced = false;
    if (reduced) out.push_back(w);
    int i = n - 1;
    while (i >= 0 && ++w[static_cast<std::size_t>(i)] == L) w[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
  }
  return out;
}

// Reduced product of letter strings.
inline std::vector<Letter> reduce(std::vector<Letter> a, const std::vector<Letter>& b) {
  for (Letter c : b) {
    if (!a.empty() && a.back() == (c ^ 1))
      a.pop_back();
    else
      a.push_back(c);
  }
  return a;
}

inline std::vector<Letter> inv(const std::vector<Letter>& w) {
  std::vector<Letter> r(w.rbegin(), w.rend());
  for (auto& c : r) c ^= 1;
  return r;
}

// μ[tail, tail·a, v] evaluated at the vertex y, straight from the
// definition: zero unless tail^-1 y starts with a, else the H-products
// along the path applied to v.
inline Vec mu_at(const MatrixSystem& sys, const std::vector<Letter>& tail, Letter a, const Vec& v,
                 const std::vector<Letter>& y) {
  auto w = reduce(inv(tail), y);
  if (w.empty() || w.front() != a) return Vec::Zero(sys.dim(a));
  Vec u = v;
  for (std::size_t i = 1; i < w.size(); ++i) u = sys.h(w[i], w[i - 1]) * u;
  return u;
}

struct Term {
  std::vector<Letter> tail;
  Letter a;
  Vec v;
};

// ⟨Σ μ(f terms), Σ μ(g terms)⟩ as a sum over the edges of depth N, which
// must be at least the depth of every term.
inline cplx inner(const NormalizedSystem& ns, const std::vector<Term>& f, const std::vector<Term>& g, int N) {
  cplx s = 0;
  for (const auto& y : sphere(ns.letters(), N + 1)) {
    const Letter last = y.back();
    Vec fy = Vec::Zero(ns.dim(last)), gy = Vec::Zero(ns.dim(last));
    for (const auto& t : f) fy += mu_at(ns.system, t.tail, t.a, t.v, y);
    for (const auto& t : g) gy += mu_at(ns.system, t.tail, t.a, t.v, y);
    s += fy.dot(ns.B(last) * gy);
  }
  return s;
}

inline Term translate(const std::vector<Letter>& x, const Term& t) { return {reduce(x, t.tail), t.a, t.v}; }

inline int depth_of(const std::vector<Term>& ts) {
  int d = 0;
  for (const auto& t : ts) {
    const int h = static_cast<int>(reduce(t.tail, {t.a}).size());
    d = std::max({d, static_cast<int>(t.tail.size()), h});
  }
  return d;
}

// s_n = Σ_{|x| = n} |⟨f, π(x) g⟩|^2 by the definition above.
inline std::vector<double> sphere_sums(const NormalizedSystem& ns, const std::vector<Term>& f,
                                       const std::vector<Term>& g, int nmax) {
  std::vector<double> s;
  for (int n = 0; n <= nmax; ++n) {
    double acc = 0;
    for (const auto& x : sphere(ns.letters(), n)) {
      std::vector<Term> gx;
      for (const auto& t : g) gx.push_back(translate(x, t));
      acc += std::norm(inner(ns, f, gx, std::max(depth_of(f), depth_of(gx))));
    }
    s.push_back(acc);
  }
  return s;
}

// Transfer operator assembled entry by entry: column (b, i, j) is
// T applied to the unit matrix E_ij placed in slot b.
inline Mat transfer_dense(const MatrixSystem& sys) {
  const int L = sys.letters();
  std::vector<Eigen::Index> off{0};
  for (Letter a = 0; a < L; ++a) off.push_back(off.back() + sys.dim(a) * sys.dim(a));
  Mat T = Mat::Zero(off.back(), off.back());
  for (Letter b = 0; b < L; ++b)
    for (int j = 0; j < sys.dim(b); ++j)
      for (int i = 0; i < sys.dim(b); ++i) {
        Mat E = Mat::Zero(sys.dim(b), sys.dim(b));
        E(i, j) = 1;
        const Eigen::Index col = off[static_cast<std::size_t>(b)] + j * sys.dim(b) + i;
        for (Letter a = 0; a < L; ++a) {
          Mat out = sys.h(b, a).adjoint() * E * sys.h(b, a);
          for (int q = 0; q < sys.dim(a); ++q)
            for (int p = 0; p < sys.dim(a); ++p) T(off[static_cast<std::size_t>(a)] + q * sys.dim(a) + p, col) += out(p, q);
        }
      }
  return T;
}

inline double spectral_radius(const Mat& M) {
  Eigen::ComplexEigenSolver<Mat> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Random system conjugated by random invertible P_a: H'_ba = P_b H_ba P_a^-1.
inline MatrixSystem conjugated(const MatrixSystem& sys, std::mt19937_64& rng) {
  MatrixSystem out = sys;
  std::vector<Mat> P;
  for (Letter a = 0; a < sys.letters(); ++a)
    P.push_back(random_mat(sys.dim(a), sys.dim(a), rng) + 3.0 * Mat::Identity(sys.dim(a), sys.dim(a)));
  for (Letter b = 0; b < sys.letters(); ++b)
    for (Letter a = 0; a < sys.letters(); ++a)
      if (b != inverse(a))
        out.h(b, a) = P[static_cast<std::size_t>(b)] * sys.h(b, a) * P[static_cast<std::size_t>(a)].inverse();
  return out;
}

}  // namespace oracle
