#include "freerep/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace freerep {

namespace {

enum class Src { H, Hh, E };

struct BlockSpec {
  int i, j;
  Src x, y;
};

// Nonzero block pattern of D; X ⊗ conj(Y) acts as S -> X S Y^H.
constexpr BlockSpec kBlocks[] = {
    {0, 0, Src::Hh, Src::Hh}, {0, 1, Src::E, Src::Hh}, {0, 2, Src::Hh, Src::E},
    {0, 3, Src::E, Src::E},   {1, 1, Src::H, Src::Hh}, {1, 3, Src::H, Src::E},
    {2, 2, Src::Hh, Src::H},  {2, 3, Src::E, Src::H},  {3, 3, Src::H, Src::H},
};

const Mat& pick(const TwinPackage& pkg, Src s, Letter a, Letter b) {
  switch (s) {
    case Src::H: return pkg.original.h(a, b);
    case Src::Hh: return pkg.twin.h(a, b);
    default: return pkg.e(a, b);
  }
}

}  // namespace

bool d_block_printed(int i, int j) {
  for (const auto& s : kBlocks)
    if (s.i == i && s.j == j) return true;
  return false;
}

Vec DMatrix::pack(int g, const std::vector<Mat>& U) const {
  Vec v = Vec::Zero(group_size(g));
  for (Letter a = 0; a < letters; ++a)
    v.segment(at(g, a) - group_begin(g), len(g, a)) = vec(U[static_cast<std::size_t>(a)]);
  return v;
}

DMatrix build_D(const TwinPackage& pkg, Exec exec) {
  const int L = pkg.letters();
  DMatrix D;
  D.letters = L;
  std::vector<int> n(static_cast<std::size_t>(L)), nh(static_cast<std::size_t>(L));
  for (Letter a = 0; a < L; ++a) {
    n[static_cast<std::size_t>(a)] = pkg.original.dim(a);
    nh[static_cast<std::size_t>(a)] = pkg.twin.dim(a);
  }
  D.rows = {nh, n, nh, n};
  D.cols = {nh, nh, n, n};
  Eigen::Index o = 0;
  for (int g = 0; g < 4; ++g) {
    auto& off = D.offset[static_cast<std::size_t>(g)];
    off.assign(static_cast<std::size_t>(L) + 1, o);
    for (Letter a = 0; a < L; ++a) {
      o += static_cast<Eigen::Index>(D.rows[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)]) *
           D.cols[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)];
      off[static_cast<std::size_t>(a) + 1] = o;
    }
  }
  D.M = Mat::Zero(o, o);

  // one task per block row (i, a); tasks write disjoint rows
  const int tasks = 4 * L;
  auto fill_row = [&](int t) {
    const int i = t / L;
    const Letter a = t % L;
    for (const auto& s : kBlocks) {
      if (s.i != i) continue;
      for (Letter b = 0; b < L; ++b) {
        if (a == inverse(b)) continue;  // all three sources vanish at ab = e
        const Mat& X = pick(pkg, s.x, a, b);
        const Mat& Y = pick(pkg, s.y, a, b);
        D.M.block(D.at(i, a), D.at(s.j, b), D.len(i, a), D.len(s.j, b)) = kron(Y.conjugate(), X);
      }
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < tasks; ++t) fill_row(t);
  } else {
    for (int t = 0; t < tasks; ++t) fill_row(t);
  }
  return D;
}

EigenOne eigen_one(const DMatrix& D, const Tolerances& tol) {
  EigenOne r;
  r.gap = std::numeric_limits<double>::infinity();
  for (int g = 0; g < 4; ++g) {
    Mat Dg = D.diagonal_group(g);
    if (Dg.size() == 0) continue;
    Eigen::ComplexEigenSolver<Mat> es(Dg, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on a diagonal group of D");
    const Vec& ev = es.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      const double d = std::abs(ev(k) - 1.0);
      r.rho_D = std::max(r.rho_D, std::abs(ev(k)));
      if (d < tol.delta)
        ++r.group_mult[static_cast<std::size_t>(g)];
      else
        r.gap = std::min(r.gap, d);
    }
  }
  for (int m : r.group_mult) r.mult_one += m;
  r.ill_conditioned = r.gap < 10 * tol.delta;

  Mat A = D.M - Mat::Identity(D.side(), D.side());
  Eigen::BDCSVD<Mat> svd(A);
  const RVec s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  r.rank_threshold = tol.delta * smax;
  auto dim_at = [&](double thr) {
    int k = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) <= thr) ++k;
    return k;
  };
  r.dim_one = dim_at(r.rank_threshold);
  const Eigen::Index tail = std::min<Eigen::Index>(8, s.size());
  r.singular_tail = s.tail(tail).reverse();
  // a call within two decades of the cutoff is reported as ambiguous
  const int lo = dim_at(r.rank_threshold * 1e-2), hi = dim_at(r.rank_threshold * 1e2);
  r.candidate_dims.push_back(r.dim_one);
  for (int d : {lo, hi})
    if (std::find(r.candidate_dims.begin(), r.candidate_dims.end(), d) == r.candidate_dims.end())
      r.candidate_dims.push_back(d);
  std::sort(r.candidate_dims.begin(), r.candidate_dims.end());
  return r;
}

TraceConditions trace_condition(const TwinPackage& pkg, double rel_tol) {
  if (!pkg.K) throw std::invalid_argument("trace_condition: K missing (twins not equivalent)");
  const int L = pkg.letters();
  const auto& K = pkg.K->K;
  std::vector<Mat> Kinv(static_cast<std::size_t>(L));
  for (Letter a = 0; a < L; ++a) Kinv[static_cast<std::size_t>(a)] = K[static_cast<std::size_t>(a)].inverse();
  TraceConditions t;
  const auto& o = pkg.original;
  const auto& w = pkg.twin;
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      if (a == inverse(b)) continue;
      const Mat& ki = Kinv[static_cast<std::size_t>(a)];
      const Mat& E = pkg.e(a, b);
      t.lemma_value += (ki * E * w.B(inverse(b)) * o.h(a, b).adjoint() * o.B(a)).trace();
      t.lemma_scale += ki.norm() * E.norm() * w.B(inverse(b)).norm() * o.h(a, b).norm() * o.B(a).norm();
      const Mat& kb = Kinv[static_cast<std::size_t>(inverse(b))];
      t.twin_value += (w.h(a, b) * o.B(inverse(b)) * kb * E.adjoint() * w.B(a)).trace();
      t.twin_scale += w.h(a, b).norm() * o.B(inverse(b)).norm() * kb.norm() * E.norm() * w.B(a).norm();
    }
  t.lemma_vanishes = std::abs(t.lemma_value) <= rel_tol * t.lemma_scale;
  t.twin_vanishes = std::abs(t.twin_value) <= rel_tol * t.twin_scale;
  return t;
}

namespace {

struct QSystem {
  Mat A;
  Vec y;
  std::vector<Eigen::Index> off;
};

QSystem q_system(const TwinPackage& pkg) {
  const int L = pkg.letters();
  const auto& o = pkg.original;
  const auto& w = pkg.twin;
  std::vector<int> n(static_cast<std::size_t>(L)), nh(static_cast<std::size_t>(L));
  for (Letter a = 0; a < L; ++a) {
    n[static_cast<std::size_t>(a)] = o.dim(a);
    nh[static_cast<std::size_t>(a)] = w.dim(a);
  }
  QSystem q;
  q.off = block_offsets(nh, n);
  Eigen::Index rows = 0;
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b)
      if (a != inverse(b)) rows += static_cast<Eigen::Index>(w.dim(a)) * o.dim(b);
  q.A = Mat::Zero(rows, q.off.back());
  q.y = Vec::Zero(rows);
  Eigen::Index r = 0;
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      if (a == inverse(b)) continue;
      const Eigen::Index m = static_cast<Eigen::Index>(w.dim(a)) * o.dim(b);
      const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
      // Ĥ_ab Q_b - Q_a H_ab = -E_ab
      q.A.block(r, q.off[ub], m, q.off[ub + 1] - q.off[ub]) +=
          kron(Mat::Identity(o.dim(b), o.dim(b)), w.h(a, b));
      q.A.block(r, q.off[ua], m, q.off[ua + 1] - q.off[ua]) -=
          kron(o.h(a, b).transpose(), Mat::Identity(w.dim(a), w.dim(a)));
      q.y.segment(r, m) = -vec(pkg.e(a, b));
      r += m;
    }
  return q;
}

}  // namespace

double q_equation_residual(const TwinPackage& pkg, const std::vector<Mat>& Q) {
  const int L = pkg.letters();
  double worst = 0, scale = 0;
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      if (a == inverse(b)) continue;
      const Mat d = pkg.twin.h(a, b) * Q[static_cast<std::size_t>(b)] + pkg.e(a, b) -
                    Q[static_cast<std::size_t>(a)] * pkg.original.h(a, b);
      worst = std::max(worst, d.norm());
      scale = std::max(scale, pkg.e(a, b).norm());
    }
  return worst / std::max(1e-300, scale);
}

QAttempt solve_Q(const TwinPackage& pkg, double accept_rel) {
  const int L = pkg.letters();
  QSystem qs = q_system(pkg);
  QAttempt out;
  const double ynorm = qs.y.norm();
  if (ynorm == 0.0) {
    QTuple t;
    for (Letter a = 0; a < L; ++a) t.Q.push_back(Mat::Zero(pkg.twin.dim(a), pkg.original.dim(a)));
    out.q = t;
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(qs.A);
  cod.setThreshold(1e-12);
  Vec x = cod.solve(qs.y);
  out.lsq_residual = (qs.A * x - qs.y).norm() / ynorm;
  if (out.lsq_residual >= accept_rel) return out;

  QTuple t;
  t.raw_residual = out.lsq_residual;
  std::vector<Mat> Q(static_cast<std::size_t>(L));
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    Q[ua] = unvec(x.segment(qs.off[ua], qs.off[ua + 1] - qs.off[ua]), pkg.twin.dim(a), pkg.original.dim(a));
  }
  t.Q.resize(static_cast<std::size_t>(L));
  for (Letter a = 0; a < L; ++a)
    t.Q[static_cast<std::size_t>(a)] = 0.5 * (Q[static_cast<std::size_t>(a)] - Q[static_cast<std::size_t>(inverse(a))].adjoint());
  Vec x2(qs.A.cols());
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    x2.segment(qs.off[ua], qs.off[ua + 1] - qs.off[ua]) = vec(t.Q[ua]);
  }
  t.residual = (qs.A * x2 - qs.y).norm() / ynorm;
  double anti = 0;
  for (Letter a = 0; a < L; ++a)
    anti = std::max(anti, (t.Q[static_cast<std::size_t>(a)].adjoint() + t.Q[static_cast<std::size_t>(inverse(a))]).norm());
  t.antisymmetry_residual = anti;
  if (t.residual >= accept_rel) {
    out.lsq_residual = std::max(out.lsq_residual, t.residual);
    return out;
  }
  out.q = std::move(t);
  return out;
}

std::array<std::vector<Mat>, 4> lemma_eigvecs(const TwinPackage& pkg) {
  if (!pkg.K) throw std::invalid_argument("lemma_eigvecs: K missing");
  const int L = pkg.letters();
  const auto& K = pkg.K->K;
  std::array<std::vector<Mat>, 4> U;
  for (Letter a = 0; a < L; ++a) {
    const Letter ai = inverse(a);
    U[0].push_back(pkg.original.B(ai));
    U[1].push_back(K[static_cast<std::size_t>(a)].inverse() * pkg.original.B(ai));
    U[2].push_back(pkg.original.B(ai) * K[static_cast<std::size_t>(ai)].inverse());
    U[3].push_back(pkg.twin.B(ai));
  }
  return U;
}

std::array<double, 4> diag_eigvec_check(const TwinPackage& pkg, const DMatrix& D) {
  auto U = lemma_eigvecs(pkg);
  std::array<double, 4> r{};
  for (int g = 0; g < 4; ++g) {
    Vec u = D.pack(g, U[static_cast<std::size_t>(g)]);
    Vec du = D.diagonal_group(g) * u;
    r[static_cast<std::size_t>(g)] = (du - u).norm() / std::max(1e-300, u.norm());
  }
  return r;
}

const char* to_string(ClassLabel c) {
  switch (c) {
    case ClassLabel::AI: return "AI";
    case ClassLabel::AII: return "AII";
    case ClassLabel::BI: return "BI";
    default: return "BII";
  }
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::monotony: return "monotony";
    case Verdict::duplicity: return "duplicity";
    case Verdict::oddity_split: return "oddity-split";
    default: return "undecided";
  }
}

int predicted_exponent(ClassLabel c, int dim_one) {
  switch (c) {
    case ClassLabel::AI:
    case ClassLabel::BI: return 1;
    case ClassLabel::AII: return 2;
    default: return dim_one == 3 ? 2 : 3;
  }
}

SpectralReport classify(const NormalizedSystem& nsys, const Tolerances& tol, Exec exec) {
  SpectralReport rep;
  rep.pkg = make_twin_package(nsys, tol);
  auto& diag = rep.diagnostics;
  if (!nsys.irreducible) diag.push_back("irreducibility undecided");
  if (rep.pkg.equivalence.status == EquivalenceStatus::undecided)
    diag.push_back("twin equivalence undecided: " + rep.pkg.equivalence.diagnostic);
  rep.twins_equivalent = rep.pkg.twins_equivalent();
  if (rep.pkg.K && !rep.pkg.K->form_unitary) diag.push_back(rep.pkg.K->diagnostic);

  DMatrix D = build_D(rep.pkg, exec);
  rep.eig = eigen_one(D, tol);
  rep.rho_D = rep.eig.rho_D;
  if (std::abs(rep.rho_D - 1.0) > 1e-8) diag.push_back("spectral radius of D differs from 1");
  if (rep.eig.ill_conditioned) diag.push_back("ill-conditioned cluster around eigenvalue 1");

  const int m = rep.eig.mult_one;
  const int d = rep.eig.dim_one;
  rep.q = solve_Q(rep.pkg, tol.identity);
  const bool q_ok = rep.q.q.has_value();

  if (rep.twins_equivalent) {
    if (m != 4) diag.push_back("equivalent twins but mult_one = " + std::to_string(m));
    if (d == 1) diag.push_back("d = 1 with equivalent twins");
    rep.class_label = d >= 4 ? ClassLabel::BI : ClassLabel::BII;
    rep.trace = trace_condition(rep.pkg);
    rep.diag_residuals = diag_eigvec_check(rep.pkg, D);
    const bool vanish = rep.trace->lemma_vanishes;
    if (vanish != (d >= 3)) diag.push_back("trace condition disagrees with dim_one");
    if (rep.trace->lemma_vanishes != rep.trace->twin_vanishes)
      diag.push_back("the two trace conditions disagree");
    for (double r : *rep.diag_residuals)
      if (r > 1e-8) diag.push_back("diagonal-block eigenvector check failed");
  } else {
    if (m != 2) diag.push_back("inequivalent twins but mult_one = " + std::to_string(m));
    if (d > 2) diag.push_back("d > 2 with inequivalent twins");
    rep.class_label = d >= 2 ? ClassLabel::AI : ClassLabel::AII;
  }
  const bool class_one = rep.class_label == ClassLabel::AI || rep.class_label == ClassLabel::BI;
  if (class_one != q_ok)
    diag.push_back(q_ok ? "Q solvable but class predicts none" : "class predicts a Q tuple but none solves");
  rep.predicted_exponent = predicted_exponent(rep.class_label, d);

  if (rep.eig.candidate_dims.size() > 1) {
    for (int c : rep.eig.candidate_dims) {
      ClassLabel cl = rep.twins_equivalent ? (c >= 4 ? ClassLabel::BI : ClassLabel::BII)
                                           : (c >= 2 ? ClassLabel::AI : ClassLabel::AII);
      rep.candidate_labels.push_back(std::string(to_string(cl)) + " (d=" + std::to_string(c) + ")");
    }
    diag.push_back("rank decision for dim_one is near the threshold");
  }

  if (!diag.empty())
    rep.verdict = Verdict::undecided;
  else
    switch (rep.class_label) {
      case ClassLabel::AI: rep.verdict = Verdict::duplicity; break;
      case ClassLabel::BI: rep.verdict = Verdict::oddity_split; break;
      default: rep.verdict = Verdict::monotony;
    }
  return rep;
}

}  // namespace freerep
