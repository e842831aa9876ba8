#include "freerep/matrix_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace freerep {

MatrixSystem MatrixSystem::zero(Alphabet alphabet, std::vector<int> dims) {
  MatrixSystem s;
  s.alphabet = std::move(alphabet);
  s.dims = std::move(dims);
  const int L = s.letters();
  if (static_cast<int>(s.dims.size()) != L) throw std::invalid_argument("dims size != 2k");
  s.H.resize(static_cast<std::size_t>(L * L));
  for (Letter b = 0; b < L; ++b)
    for (Letter a = 0; a < L; ++a) s.h(b, a) = Mat::Zero(s.dim(b), s.dim(a));
  return s;
}

double FormTuple::norm() const {
  double s = 0;
  for (const auto& b : B) s += b.squaredNorm();
  return std::sqrt(s);
}

std::vector<Eigen::Index> block_offsets(const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<Eigen::Index> off(rows.size() + 1, 0);
  for (std::size_t a = 0; a < rows.size(); ++a)
    off[a + 1] = off[a] + static_cast<Eigen::Index>(rows[a]) * cols[a];
  return off;
}

std::vector<Diagnostic> validate(const MatrixSystem& sys) {
  std::vector<Diagnostic> out;
  const int L = sys.letters();
  if (L < 4) out.push_back({"dims", "need at least two generators", std::nullopt});
  if (static_cast<int>(sys.dims.size()) != L) {
    out.push_back({"dims", "dims has " + std::to_string(sys.dims.size()) + " entries, expected " +
                               std::to_string(L), std::nullopt});
    return out;
  }
  for (Letter a = 0; a < L; ++a)
    if (sys.dim(a) < 1)
      out.push_back({"dims", "dimension of " + sys.alphabet.name(a) + " must be >= 1", std::nullopt});
  if (static_cast<int>(sys.H.size()) != L * L) {
    out.push_back({"shape", "H table has wrong size", std::nullopt});
    return out;
  }
  bool any = false;
  for (Letter b = 0; b < L; ++b) {
    for (Letter a = 0; a < L; ++a) {
      const Mat& m = sys.h(b, a);
      const std::string where = sys.alphabet.name(b) + "|" + sys.alphabet.name(a);
      if (m.rows() != sys.dim(b) || m.cols() != sys.dim(a)) {
        out.push_back({"shape", "block " + where + " is " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()) + ", expected " +
                                    std::to_string(sys.dim(b)) + "x" + std::to_string(sys.dim(a)),
                       std::make_pair(b, a)});
        continue;
      }
      if (!m.allFinite()) {
        out.push_back({"finite", "block " + where + " has non-finite entries", std::make_pair(b, a)});
        continue;
      }
      if (b == inverse(a)) {
        if (m.size() && m.cwiseAbs().maxCoeff() != 0.0)
          out.push_back({"inverse-pair", "nonzero at ba=e: block " + where + " must vanish",
                         std::make_pair(b, a)});
      } else if (m.size() && m.cwiseAbs().maxCoeff() > 0.0) {
        any = true;
      }
    }
  }
  if (!any) out.push_back({"zero-system", "all maps H_ba vanish", std::nullopt});
  return out;
}

namespace {

// Adds the columns of C to the orthonormal basis Q when they leave its span.
bool extend_basis(Mat& Q, const Mat& C, Eigen::Index full) {
  bool grew = false;
  for (Eigen::Index j = 0; j < C.cols() && Q.cols() < full; ++j) {
    Vec v = C.col(j);
    double n0 = v.norm();
    if (n0 == 0.0) continue;
    v /= n0;
    for (int pass = 0; pass < 2; ++pass)
      if (Q.cols()) v -= Q * (Q.adjoint() * v);
    double n1 = v.norm();
    if (n1 > 1e-9) {
      Q.conservativeResize(Q.rows(), Q.cols() + 1);
      Q.col(Q.cols() - 1) = v / n1;
      grew = true;
    }
  }
  return grew;
}

}  // namespace

IrreducibilityReport irreducibility(const MatrixSystem& sys) {
  const int L = sys.letters();
  IrreducibilityReport rep;
  std::vector<Mat> span(static_cast<std::size_t>(L * L));
  auto sp = [&](Letter b, Letter a) -> Mat& { return span[static_cast<std::size_t>(b * L + a)]; };
  auto full = [&](Letter b, Letter a) { return static_cast<Eigen::Index>(sys.dim(b)) * sys.dim(a); };

  for (Letter b = 0; b < L; ++b)
    for (Letter a = 0; a < L; ++a) {
      sp(b, a) = Mat(full(b, a), 0);
      extend_basis(sp(b, a), vec(sys.h(b, a)), full(b, a));
    }

  auto complete = [&] {
    for (Letter b = 0; b < L; ++b)
      for (Letter a = 0; a < L; ++a)
        if (sp(b, a).cols() < full(b, a)) return false;
    return true;
  };

  int total_n2 = 0;
  for (int n : sys.dims) total_n2 += n * n;
  const int lmax = total_n2 + L;  // Σ n_a² + 2k
  rep.status = Irreducibility::undecided;
  for (int round = 1; round <= lmax; ++round) {
    rep.rounds = round;
    if (complete()) {
      rep.status = Irreducibility::irreducible;
      break;
    }
    // paths one letter longer: X ∈ S(c <- a)  ->  H_bc X ∈ S(b <- a)
    bool grew = false;
    std::vector<Mat> next = span;
    for (Letter a = 0; a < L; ++a)
      for (Letter c = 0; c < L; ++c) {
        const Mat& S = sp(c, a);
        if (S.cols() == 0) continue;
        for (Letter b = 0; b < L; ++b) {
          if (b == inverse(c)) continue;
          Mat& T = next[static_cast<std::size_t>(b * L + a)];
          if (T.cols() == full(b, a)) continue;
          Mat C = kron(Mat::Identity(sys.dim(a), sys.dim(a)), sys.h(b, c)) * S;
          grew |= extend_basis(T, C, full(b, a));
        }
      }
    span.swap(next);
    if (!grew) {
      rep.status = complete() ? Irreducibility::irreducible : Irreducibility::reducible;
      break;
    }
  }
  if (rep.status == Irreducibility::undecided && complete()) rep.status = Irreducibility::irreducible;
  rep.span_dims.resize(span.size());
  for (std::size_t i = 0; i < span.size(); ++i) rep.span_dims[i] = static_cast<int>(span[i].cols());
  return rep;
}

bool is_irreducible(const MatrixSystem& sys) {
  return irreducibility(sys).status == Irreducibility::irreducible;
}

FormTuple transfer_apply(const MatrixSystem& sys, const FormTuple& t) {
  const int L = sys.letters();
  if (static_cast<int>(t.B.size()) != L) throw std::invalid_argument("transfer_apply: tuple size");
  FormTuple r;
  r.B.resize(static_cast<std::size_t>(L));
  for (Letter a = 0; a < L; ++a) {
    Mat acc = Mat::Zero(sys.dim(a), sys.dim(a));
    for (Letter b = 0; b < L; ++b) {
      if (b == inverse(a)) continue;
      const Mat& M = sys.h(b, a);
      const Mat& tb = t.B[static_cast<std::size_t>(b)];
      if (tb.rows() != sys.dim(b) || tb.cols() != sys.dim(b))
        throw std::invalid_argument("transfer_apply: shape mismatch at " + sys.alphabet.name(b));
      acc.noalias() += M.adjoint() * tb * M;
    }
    r.B[static_cast<std::size_t>(a)] = std::move(acc);
  }
  return r;
}

Mat transfer_matrix(const MatrixSystem& sys) {
  const int L = sys.letters();
  auto off = block_offsets(sys.dims, sys.dims);
  Mat T = Mat::Zero(off.back(), off.back());
  // vec(M^H t M) = kron(M^T, M^H) vec(t)
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      if (b == inverse(a)) continue;
      const Mat& M = sys.h(b, a);
      T.block(off[static_cast<std::size_t>(a)], off[static_cast<std::size_t>(b)],
              off[static_cast<std::size_t>(a) + 1] - off[static_cast<std::size_t>(a)],
              off[static_cast<std::size_t>(b) + 1] - off[static_cast<std::size_t>(b)]) +=
          kron(M.transpose(), M.adjoint());
    }
  return T;
}

double spectral_radius_T(const MatrixSystem& sys) {
  Mat T = transfer_matrix(sys);
  if (T.cwiseAbs().maxCoeff() == 0.0) throw NumericalError("degenerate system: T vanishes");
  Eigen::ComplexEigenSolver<Mat> es(T, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on T");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MatrixSystem scaled(const MatrixSystem& sys, double s) {
  MatrixSystem r = sys;
  for (auto& m : r.H) m *= s;
  return r;
}

double compatibility_residual(const MatrixSystem& sys, const FormTuple& forms) {
  FormTuple t = transfer_apply(sys, forms);
  double worst = 0;
  for (std::size_t a = 0; a < forms.B.size(); ++a)
    worst = std::max(worst, (forms.B[a] - t.B[a]).norm());
  return worst / std::max(1e-300, forms.norm());
}

namespace {

void hermitize(FormTuple& t) {
  for (auto& b : t.B) b = (0.5 * (b + b.adjoint())).eval();
}

void trace_normalize(FormTuple& t, const std::vector<int>& dims) {
  cplx tr = 0;
  for (const auto& b : t.B) tr += b.trace();
  const double target = std::accumulate(dims.begin(), dims.end(), 0.0);
  for (auto& b : t.B) b *= target / tr;
}

double residual(const MatrixSystem& sys, const FormTuple& t) {
  return compatibility_residual(sys, t);
}

// Componentwise Aitken extrapolation of three successive iterates.
FormTuple aitken(const FormTuple& x0, const FormTuple& x1, const FormTuple& x2) {
  FormTuple r = x2;
  for (std::size_t a = 0; a < x2.B.size(); ++a) {
    const Mat& p = x0.B[a];
    const Mat& q = x1.B[a];
    const Mat& s = x2.B[a];
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      cplx d1 = q(i) - p(i), d2 = s(i) - q(i), den = d2 - d1;
      if (std::abs(den) > 1e-14 * (std::abs(s(i)) + 1e-300)) r.B[a](i) = s(i) - d2 * d2 / den;
    }
  }
  return r;
}

}  // namespace

NormalizedSystem normalize(const MatrixSystem& input, const Tolerances& tol) {
  auto diags = validate(input);
  if (!diags.empty()) throw std::invalid_argument("normalize: invalid system: " + diags.front().message);
  const int L = input.letters();

  NormalizedSystem ns;
  auto irr = irreducibility(input);
  if (irr.status == Irreducibility::reducible)
    throw ReducibleSystemError("eigenvalue 1 not simple: system is reducible");
  ns.irreducible = irr.status == Irreducibility::irreducible;

  Mat T = transfer_matrix(input);
  Eigen::ComplexEigenSolver<Mat> es(T, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on T");
  const Vec ev = es.eigenvalues();
  const double rho = ev.cwiseAbs().maxCoeff();
  if (!(rho > 0)) throw NumericalError("degenerate system: spectral radius 0");
  int near_one = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i) / rho - 1.0) < 1e-6) ++near_one;
  if (near_one != 1) throw ReducibleSystemError("eigenvalue 1 not simple (" + std::to_string(near_one) + " copies)");

  ns.input_scale = 1.0 / std::sqrt(rho);
  ns.system = scaled(input, ns.input_scale);

  FormTuple t;
  for (Letter a = 0; a < L; ++a) t.B.push_back(Mat::Identity(input.dim(a), input.dim(a)));
  trace_normalize(t, input.dims);
  FormTuple h1 = t, h2 = t;
  double res = residual(ns.system, t);
  int it = 0;
  const int max_it = 10000;
  while (res > 0.1 * tol.fix && it < max_it) {
    FormTuple nx = transfer_apply(ns.system, t);
    hermitize(nx);
    trace_normalize(nx, input.dims);
    h1 = h2;
    h2 = t;
    t = std::move(nx);
    ++it;
    res = residual(ns.system, t);
    if (it % 3 == 0 && it >= 3) {
      FormTuple ex = aitken(h1, h2, t);
      hermitize(ex);
      trace_normalize(ex, input.dims);
      double rex = residual(ns.system, ex);
      if (rex < res) {
        t = std::move(ex);
        res = rex;
      }
    }
  }
  ns.power_iterations = it;
  if (res <= 0.1 * tol.fix) {
    // Downstream identities chain several B's, so polish to roundoff with a
    // couple of shifted inverse iteration steps on the (small) transfer matrix.
    Mat Ts = transfer_matrix(ns.system);
    const Eigen::Index m = Ts.rows();
    Eigen::PartialPivLU<Mat> lu(Ts - cplx(1.0 + 1e-9, 0) * Mat::Identity(m, m));
    auto off = block_offsets(input.dims, input.dims);
    Vec v(m);
    for (Letter a = 0; a < L; ++a)
      v.segment(off[static_cast<std::size_t>(a)], off[static_cast<std::size_t>(a) + 1] - off[static_cast<std::size_t>(a)]) =
          vec(t.B[static_cast<std::size_t>(a)]);
    for (int k = 0; k < 2; ++k) {
      v = lu.solve(v);
      v /= v.norm();
    }
    FormTuple p = t;
    for (Letter a = 0; a < L; ++a)
      p.B[static_cast<std::size_t>(a)] =
          unvec(v.segment(off[static_cast<std::size_t>(a)], off[static_cast<std::size_t>(a) + 1] - off[static_cast<std::size_t>(a)]),
                input.dim(a), input.dim(a));
    cplx tr = 0;
    for (const auto& b : p.B) tr += b.trace();
    for (auto& b : p.B) b /= tr;
    hermitize(p);
    trace_normalize(p, input.dims);
    const double rp = residual(ns.system, p);
    if (std::isfinite(rp) && rp < res) {
      t = std::move(p);
      res = rp;
    }
  }
  if (res > 0.1 * tol.fix) {
    // direct eigensolve fallback
    Mat Ts = transfer_matrix(ns.system);
    Eigen::ComplexEigenSolver<Mat> es2(Ts, true);
    Eigen::Index best = 0;
    es2.eigenvalues().unaryExpr([](cplx z) { return std::abs(z - 1.0); }).real().minCoeff(&best);
    Vec v = es2.eigenvectors().col(best);
    auto off = block_offsets(input.dims, input.dims);
    for (Letter a = 0; a < L; ++a)
      t.B[static_cast<std::size_t>(a)] =
          unvec(v.segment(off[static_cast<std::size_t>(a)], off[static_cast<std::size_t>(a) + 1] - off[static_cast<std::size_t>(a)]),
                input.dim(a), input.dim(a));
    // remove the arbitrary phase before hermitizing
    cplx tr = 0;
    for (const auto& b : t.B) tr += b.trace();
    for (auto& b : t.B) b /= tr;
    hermitize(t);
    trace_normalize(t, input.dims);
    ns.used_direct_solve = true;
    res = residual(ns.system, t);
  }
  ns.forms = std::move(t);

  double minev = std::numeric_limits<double>::infinity();
  for (const auto& b : ns.forms.B) {
    Eigen::SelfAdjointEigenSolver<Mat> se(b, Eigen::EigenvaluesOnly);
    minev = std::min(minev, se.eigenvalues().minCoeff());
  }
  if (minev <= tol.pd * ns.forms.norm()) throw NumericalError("B not positive definite");
  if (res > tol.fix) throw NumericalError("fixed-point residual " + std::to_string(res) + " above tolerance");
  ns.rho_certificate = spectral_radius_T(ns.system);
  return ns;
}

}  // namespace freerep
