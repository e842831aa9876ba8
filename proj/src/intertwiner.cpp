#include "freerep/intertwiner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "freerep/twin.hpp"

namespace freerep {

namespace {

Mat pair_block(const Mat& tl, const Mat& tr, const Mat& bl, const Mat& br) {
  Mat m(tl.rows() + bl.rows(), tl.cols() + tr.cols());
  m << tl, tr, bl, br;
  return m;
}

Mat blockdiag(const Mat& a, const Mat& b) {
  Mat m = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

double rel(const Mat& d, double scale) { return d.norm() / std::max(1e-300, scale); }

}  // namespace

EdgeMaps Intertwiner::maps() const {
  EdgeMaps m;
  for (Letter a = 0; a < letters(); ++a) {
    m.X.push_back(-Q[static_cast<std::size_t>(a)]);
    m.Y.push_back(original.B(a));
  }
  return m;
}

Mat Intertwiner::block(Letter a) const {
  const Letter b = inverse(a);
  return pair_block(-Q[static_cast<std::size_t>(a)], original.B(b), original.B(a), -Q[static_cast<std::size_t>(b)]);
}

Mat Intertwiner::inverse_block(Letter a) const {
  const Letter b = inverse(a);
  return pair_block(-Qhat[static_cast<std::size_t>(a)], twin.B(b), twin.B(a), -Qhat[static_cast<std::size_t>(b)]);
}

Intertwiner build_J(const SpectralReport& rep) {
  if (!rep.q.q) throw std::invalid_argument("build_J: no Q tuple, classes AII and BII have no intertwiner J");
  return build_J(rep.pkg, rep.q.q->Q);
}

Intertwiner build_J(const TwinPackage& pkg, const std::vector<Mat>& Q) {
  const int L = pkg.letters();
  if (static_cast<int>(Q.size()) != L) throw std::invalid_argument("build_J: Q has the wrong length");
  Intertwiner J;
  J.original = pkg.original;
  J.twin = pkg.twin;
  J.Q = Q;
  // closed form (B_{a^-1} + Q_a B_a^-1 Q_a^H)^-1, proportional to the twin forms
  std::vector<Mat> cf(static_cast<std::size_t>(L));
  double tcf = 0, ttw = 0;
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const Mat inner = pkg.original.B(inverse(a)) + Q[ua] * pkg.original.B(a).ldlt().solve(Q[ua].adjoint());
    cf[ua] = inner.inverse();
    tcf += cf[ua].trace().real();
    ttw += pkg.twin.B(a).trace().real();
  }
  J.beta = tcf / ttw;
  if (!(J.beta > 0) || !std::isfinite(J.beta)) throw NumericalError("build_J: closed-form twin forms not positive");
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    J.twin.forms.B[ua] *= J.beta;
    J.bhat_residual = std::max(J.bhat_residual, rel(cf[ua] - J.twin.forms.B[ua], cf[ua].norm()));
  }
  J.Qhat.resize(static_cast<std::size_t>(L));
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    J.Qhat[ua] = pkg.original.B(a).ldlt().solve(Q[ua].adjoint() * J.twin.B(a));
  }
  if (pkg.K) {
    std::vector<Mat> K = pkg.K->K;
    for (auto& k : K) k /= std::sqrt(J.beta);
    J.K = std::move(K);
  }
  return J;
}

double InverseResiduals::max() const { return std::max({left_identity, bq, qb, closed_vs_numeric}); }

InverseResiduals verify_inverse_relations(const Intertwiner& J) {
  InverseResiduals r;
  for (Letter a = 0; a < J.letters(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const Letter b = inverse(a);
    const auto ub = static_cast<std::size_t>(b);
    const Mat& Q = J.Q[ua];
    const Mat& Qh = J.Qhat[ua];
    const Mat t1 = Qh * Q, t2 = J.twin.B(b) * J.original.B(a);
    const Mat id = Mat::Identity(t1.rows(), t1.cols());
    r.left_identity = std::max(r.left_identity, rel(t1 + t2 - id, std::max({1.0, t1.norm(), t2.norm()})));
    const Mat u1 = J.twin.B(a) * Q, u2 = J.Qhat[ub] * J.original.B(a);
    r.bq = std::max(r.bq, rel(u1 + u2, std::max({1e-300, u1.norm(), u2.norm()})));
    const Mat w1 = J.Q[ub] * J.twin.B(a), w2 = J.original.B(a) * Qh;
    r.qb = std::max(r.qb, rel(w1 + w2, std::max({1e-300, w1.norm(), w2.norm()})));
  }
  for (Letter a = 0; a < J.letters(); a += 2) {
    const Mat numeric = J.block(a).inverse();
    r.closed_vs_numeric = std::max(r.closed_vs_numeric, rel(J.inverse_block(a) - numeric, numeric.norm()));
  }
  return r;
}

Mat edge_operator_matrix(const EdgeMaps& m, const MatrixSystem& target, const EdgeSpace& from,
                         const EdgeSpace& to) {
  if (to.depth() < from.depth()) throw std::invalid_argument("edge_operator_matrix: target depth too small");
  Mat P = Mat::Zero(to.dim(), from.dim());
  const int ne = static_cast<int>(from.edges());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < ne; ++i) {
    const auto e = static_cast<std::size_t>(i);
    const Word& h = from.head(e);
    const Letter c = h.back();
    const Word x(std::vector<Letter>(h.letters().begin(), h.letters().end() - 1));
    const Eigen::Index col = from.offset(e);
    const int n = from.edge_dim(e);
    auto add = [&](const std::vector<Letter>& w, const Mat& u) {
      const std::size_t f = to.index_of(Word(w));
      P.block(to.offset(f), col, u.rows(), n) += u;
    };
    for_each_canonical_block(target, x, c, m.X[static_cast<std::size_t>(c)], to.depth(), add);
    for_each_canonical_block(target, h, inverse(c), m.Y[static_cast<std::size_t>(c)], to.depth(), add);
  }
  return P;
}

Mat blockwise_matrix(const std::vector<Mat>& M, const EdgeSpace& from, const EdgeSpace& to) {
  if (from.depth() != to.depth()) throw std::invalid_argument("blockwise_matrix: depths differ");
  Mat P = Mat::Zero(to.dim(), from.dim());
  for (std::size_t e = 0; e < from.edges(); ++e) {
    const Mat& m = M[static_cast<std::size_t>(from.letter(e))];
    P.block(to.offset(e), from.offset(e), m.rows(), m.cols()) = m;
  }
  return P;
}

Mat j_matrix(const Intertwiner& J, int depth) {
  const EdgeSpace from(J.original.system.dims, depth), to(J.twin.system.dims, depth);
  return edge_operator_matrix(J.maps(), J.twin.system, from, to);
}

namespace {

double intertwining_on(const EdgeMaps& m, const NormalizedSystem& orig, const NormalizedSystem& tw, int depth,
                       const Mat& T0) {
  const EdgeSpace w0(orig.system.dims, depth), w1(orig.system.dims, depth + 1);
  const EdgeSpace h0(tw.system.dims, depth), h1(tw.system.dims, depth + 1);
  const Mat T1 = edge_operator_matrix(m, tw.system, w1, h1);
  double worst = 0;
  for (Letter y = 0; y < orig.letters(); ++y) {
    const Word g({y});
    const Mat lhs = T1 * pi_matrix(orig.system, g, w0, w1);
    const Mat rhs = pi_matrix(tw.system, g, h0, h1) * T0;
    worst = std::max(worst, rel(lhs - rhs, std::max(lhs.norm(), rhs.norm())));
  }
  return worst;
}

}  // namespace

WResiduals verify_isometry_and_intertwining(const Intertwiner& J, int depth, Exec) {
  WResiduals r;
  r.depth = depth;
  const EdgeSpace w(J.original.system.dims, depth), h(J.twin.system.dims, depth);
  const Mat T = edge_operator_matrix(J.maps(), J.twin.system, w, h);
  const Mat G = w.gram(J.original.forms), Gh = h.gram(J.twin.forms);
  const Mat P = T.adjoint() * Gh * T;
  r.isometry = rel(P - G, G.norm());
  r.form_scale = P.trace().real() / G.trace().real();
  r.intertwining = intertwining_on(J.maps(), J.original, J.twin, depth, T);
  return r;
}

double intertwining_residual(const EdgeMaps& m, const NormalizedSystem& orig, const NormalizedSystem& twin,
                             int depth, Exec) {
  const EdgeSpace w(orig.system.dims, depth), h(twin.system.dims, depth);
  return intertwining_on(m, orig, twin, depth, edge_operator_matrix(m, twin.system, w, h));
}

double fin_residual(const Intertwiner& J, int nmax) {
  const int L = J.letters();
  const MatrixSystem& H = J.original.system;
  const MatrixSystem& Hh = J.twin.system;
  const std::vector<Mat> Eh = e_maps(J.twin, H);  // Ê_ab : V̂_b -> V_a
  auto eh = [&](Letter a, Letter b) -> const Mat& { return Eh[static_cast<std::size_t>(a * L + b)]; };
  double worst = 0;
  for (int n = 1; n <= nmax; ++n) {
    for_each_in_sphere(L, n + 1, [&](const std::vector<Letter>& w) {
      // w[0] = a_1, ..., w[n] = a_{n+1}
      auto hchain = [&](int from, int to) {  // H_{a_to a_{to-1}} ... H_{a_{from+1} a_from}, 1-based
        Mat m = Mat::Identity(H.dim(w[static_cast<std::size_t>(from - 1)]), H.dim(w[static_cast<std::size_t>(from - 1)]));
        for (int i = from; i < to; ++i) m = H.h(w[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i - 1)]) * m;
        return m;
      };
      auto hhchain = [&](int from, int to) {
        Mat m = Mat::Identity(Hh.dim(w[static_cast<std::size_t>(from - 1)]), Hh.dim(w[static_cast<std::size_t>(from - 1)]));
        for (int i = from; i < to; ++i) m = Hh.h(w[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i - 1)]) * m;
        return m;
      };
      const Letter a1 = w.front(), an1 = w.back();
      const Mat t1 = hchain(1, n + 1) * J.Qhat[static_cast<std::size_t>(a1)];
      const Mat t2 = J.Qhat[static_cast<std::size_t>(an1)] * hhchain(1, n + 1);
      Mat sum = t1 - t2;
      double scale = std::max(t1.norm(), t2.norm());
      for (int j = 0; j <= n - 1; ++j) {
        // H_{a_{n+1} a_n} ... H_{a_{j+3} a_{j+2}} Ê_{a_{j+2} a_{j+1}} Ĥ_{a_{j+1} a_j} ... Ĥ_{a_2 a_1}
        const Mat term = hchain(j + 2, n + 1) * eh(w[static_cast<std::size_t>(j + 1)], w[static_cast<std::size_t>(j)]) *
                         hhchain(1, j + 1);
        sum += term;
        scale = std::max(scale, term.norm());
      }
      worst = std::max(worst, rel(sum, scale));
    });
  }
  return worst;
}

FamilyMember general_intertwiner_family(const Intertwiner& J, double lambda, double c) {
  if (!(lambda > 0)) throw std::invalid_argument("general_intertwiner_family: lambda must be positive");
  if (c != 0 && !J.K)
    throw std::invalid_argument(
        "general_intertwiner_family: inequivalent twins admit only c = 0 (X_a must be -λQ_a, Y_a must be λB_a)");
  FamilyMember f;
  f.lambda = lambda;
  f.c = c;
  for (Letter a = 0; a < J.letters(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    Mat x = -lambda * J.Q[ua];
    if (J.K) x += cplx(0, c) * (*J.K)[ua];
    f.maps.X.push_back(std::move(x));
    f.maps.Y.push_back(lambda * J.original.B(a));
  }
  f.intertwining_residual = intertwining_residual(f.maps, J.original, J.twin, 2);
  return f;
}

SplitReport split(const Intertwiner& J, double tol) {
  if (!J.K) throw std::invalid_argument("split: needs K (class BI)");
  const auto& K = *J.K;
  const int L = J.letters();
  SplitReport r;
  std::vector<Mat> M;
  std::vector<cplx> plus, minus;
  for (Letter a = 0; a < L; a += 2) {
    const Mat Kb = blockdiag(K[static_cast<std::size_t>(a)], K[static_cast<std::size_t>(a) + 1]);
    M.push_back(Kb.partialPivLu().solve(J.block(a)));
    Eigen::ComplexEigenSolver<Mat> es(M.back(), false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      (es.eigenvalues()(i).real() >= 0 ? plus : minus).push_back(es.eigenvalues()(i));
  }
  if (plus.empty() || minus.empty()) {
    r.diagnostic = "eigenvalues of K^-1 J form a single cluster";
    return r;
  }
  auto mean = [](const std::vector<cplx>& v) {
    cplx s = 0;
    for (auto z : v) s += z;
    return s / static_cast<double>(v.size());
  };
  r.lambda_plus = mean(plus);
  r.lambda_minus = mean(minus);
  for (auto z : plus) r.cluster_spread = std::max(r.cluster_spread, std::abs(z - r.lambda_plus));
  for (auto z : minus) r.cluster_spread = std::max(r.cluster_spread, std::abs(z - r.lambda_minus));
  const cplx cc = cplx(0, 1) * (r.lambda_plus + r.lambda_minus);
  r.c = cc.real();
  r.c_imag = std::abs(cc.imag());
  r.lambda_constant = -r.lambda_plus * r.lambda_minus;
  r.unimodularity = std::max(std::abs(std::abs(r.lambda_plus) - 1), std::abs(std::abs(r.lambda_minus) - 1));
  for (const auto& m : M) {
    const Mat q = m * m + cplx(0, r.c) * m - Mat::Identity(m.rows(), m.cols());
    r.quadratic = std::max(r.quadratic, q.norm() / std::max(1.0, (m * m).norm()));
  }
  if (std::abs(r.c) >= 2) {
    r.diagnostic = "|c| >= 2: sqrt(4 - c^2) is not real";
    return r;
  }
  // J~ = s (J + (ic/2) K): with M^2 + icM - Id = 0 this is the sign that
  // moves the eigenvalues of K^-1 J~ to +1 and -1
  const double s = 2 / std::sqrt(4 - r.c * r.c);
  for (std::size_t p = 0; p < M.size(); ++p) {
    const Letter a = static_cast<Letter>(2 * p);
    const Mat& m = M[p];
    const Mat id = Mat::Identity(m.rows(), m.cols());
    const Mat Jc = s * (m + cplx(0, r.c / 2) * id);
    const Mat Pp = 0.5 * (id + Jc), Pm = 0.5 * (id - Jc);
    const double sc = std::max(1.0, Pp.norm());
    r.idempotency = std::max({r.idempotency, rel(Pp * Pp - Pp, sc), rel(Pm * Pm - Pm, sc)});
    r.orthogonality = std::max({r.orthogonality, rel(Pp * Pm, sc), rel(Pm * Pp, sc)});
    r.completeness = std::max(r.completeness, rel(Pp + Pm - id, id.norm()));
    const Mat G = blockdiag(J.original.B(a), J.original.B(a + 1));
    r.form_hermitian = std::max(r.form_hermitian, rel(G * Pp - Pp.adjoint() * G, (G * Pp).norm()));
    r.dim_plus.push_back(numeric_rank(Pp, 1e-8));
    r.dim_minus.push_back(numeric_rank(Pm, 1e-8));
    r.P_plus.push_back(Pp);
    r.P_minus.push_back(Pm);
  }
  // the same projections as operators on W_2 and W_3
  EdgeMaps tilde;
  std::vector<Mat> Kinv;
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    tilde.X.push_back(s * (-J.Q[ua] + cplx(0, r.c / 2) * K[ua]));
    tilde.Y.push_back(s * J.original.B(a));
    Kinv.push_back(K[ua].inverse());
  }
  auto script_j = [&](int depth) {
    const EdgeSpace w(J.original.system.dims, depth), h(J.twin.system.dims, depth);
    return Mat(blockwise_matrix(Kinv, h, w) * edge_operator_matrix(tilde, J.twin.system, w, h));
  };
  const Mat J2 = script_j(2), J3 = script_j(3);
  const EdgeSpace w2(J.original.system.dims, 2), w3(J.original.system.dims, 3);
  const Mat I2 = Mat::Identity(J2.rows(), J2.cols()), I3 = Mat::Identity(J3.rows(), J3.cols());
  r.operator_involution = rel(J2 * J2 - I2, I2.norm());
  for (int sign : {1, -1}) {
    const Mat P2 = 0.5 * (I2 + sign * J2), P3 = 0.5 * (I3 + sign * J3);
    for (Letter y = 0; y < L; ++y) {
      const Mat pi = pi_matrix(J.original.system, Word({y}), w2, w3);
      const Mat lhs = P3 * pi, rhs = pi * P2;
      r.commutation = std::max(r.commutation, rel(lhs - rhs, std::max(1.0, pi.norm())));
    }
  }
  r.ok = r.c_imag <= tol && r.unimodularity <= tol && r.quadratic <= tol && r.idempotency <= tol &&
         r.orthogonality <= tol && r.commutation <= 1e-8;
  if (!r.ok && r.diagnostic.empty()) r.diagnostic = "splitting identities violated beyond tolerance";
  return r;
}

RankProfile finite_rank_check(const Intertwiner& J, Letter a, Letter b, int nmin, int nmax, std::uint64_t seed) {
  if (a == b) throw std::invalid_argument("finite_rank_check: a and b must differ");
  if (nmin < 0 || nmax < nmin) throw std::invalid_argument("finite_rank_check: bad depth range");
  RankProfile p;
  p.a = a;
  p.b = b;
  p.bound = J.twin.system.dim(b);
  const EdgeMaps maps = J.maps();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int n = nmin; n <= nmax; ++n) {
    const EdgeSpace from(J.original.system.dims, n), to(J.twin.system.dims, n);
    // restricted coordinates: columns in Γ(a), rows in Γ(b)
    std::vector<Eigen::Index> row_at(to.edges(), -1);
    Eigen::Index rows = 0, cols = 0;
    std::vector<std::size_t> row_edges, col_edges;
    for (std::size_t f = 0; f < to.edges(); ++f)
      if (to.head(f)[0] == b) {
        row_at[f] = rows;
        rows += to.edge_dim(f);
        row_edges.push_back(f);
      }
    std::vector<Eigen::Index> col_at;
    for (std::size_t e = 0; e < from.edges(); ++e)
      if (from.head(e)[0] == a) {
        col_at.push_back(cols);
        cols += from.edge_dim(e);
        col_edges.push_back(e);
      }
    Mat A = Mat::Zero(rows, cols);
    const int nc = static_cast<int>(col_edges.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < nc; ++i) {
      const std::size_t e = col_edges[static_cast<std::size_t>(i)];
      const Word& h = from.head(e);
      const Letter c = h.back();
      const Word x(std::vector<Letter>(h.letters().begin(), h.letters().end() - 1));
      const int ncol = from.edge_dim(e);
      auto add = [&](const std::vector<Letter>& w, const Mat& u) {
        if (w[0] != b) return;
        const std::size_t f = to.index_of(Word(w));
        A.block(row_at[f], col_at[static_cast<std::size_t>(i)], u.rows(), ncol) += u;
      };
      for_each_canonical_block(J.twin.system, x, c, maps.X[static_cast<std::size_t>(c)], n, add);
      for_each_canonical_block(J.twin.system, h, inverse(c), maps.Y[static_cast<std::size_t>(c)], n, add);
    }
    // a sketch with bound + 4 random columns sees any rank up to that size
    const Eigen::Index r = p.bound + 4;
    int rank = 0;
    if (cols <= r) {
      rank = numeric_rank(A, 1e-9);
    } else {
      Mat Om(cols, r);
      for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index i = 0; i < cols; ++i) {
          const double re = nd(rng);
          const double im = nd(rng);
          Om(i, j) = cplx(re, im);
        }
      rank = numeric_rank(A * Om, 1e-9);
    }
    // Hilbert-Schmidt norm: tr(A^H Ĝ A G^-1) with block-diagonal forms
    Mat GA = A;
    for (std::size_t k = 0; k < row_edges.size(); ++k) {
      const std::size_t f = row_edges[k];
      const int m = to.edge_dim(f);
      GA.middleRows(row_at[f], m) = J.twin.B(to.letter(f)) * A.middleRows(row_at[f], m);
    }
    for (std::size_t k = 0; k < col_edges.size(); ++k) {
      const std::size_t e = col_edges[k];
      const int m = from.edge_dim(e);
      GA.middleCols(col_at[k], m) = GA.middleCols(col_at[k], m) * J.original.B(from.letter(e)).inverse();
    }
    const double hs2 = (A.conjugate().cwiseProduct(GA)).sum().real();
    p.depths.push_back(n);
    p.rank.push_back(rank);
    p.hs_norm.push_back(std::sqrt(std::max(0.0, hs2)));
  }
  p.within_bound = std::all_of(p.rank.begin(), p.rank.end(), [&](int r) { return r <= p.bound; });
  p.stabilizes = true;
  for (std::size_t i = 1; i < p.rank.size(); ++i) p.stabilizes &= p.rank[i] <= p.rank[i - 1];
  if (p.rank.size() >= 2) p.stabilizes &= p.rank.back() == p.rank[p.rank.size() - 2];
  return p;
}

}  // namespace freerep
