#include "freerep/twin.hpp"

#include <algorithm>
#include <cmath>

namespace freerep {

MatrixSystem twin_system(const MatrixSystem& sys) {
  const int L = sys.letters();
  std::vector<int> dh(static_cast<std::size_t>(L));
  for (Letter a = 0; a < L; ++a) dh[static_cast<std::size_t>(a)] = sys.dim(inverse(a));
  MatrixSystem t = MatrixSystem::zero(sys.alphabet, dh);
  for (Letter b = 0; b < L; ++b)
    for (Letter a = 0; a < L; ++a)
      if (b != inverse(a)) t.h(b, a) = sys.h(inverse(a), inverse(b)).adjoint();
  return t;
}

NormalizedSystem twin(const NormalizedSystem& nsys, const Tolerances& tol) {
  return normalize(twin_system(nsys.system), tol);
}

std::vector<Mat> e_maps(const NormalizedSystem& nsys, const MatrixSystem& tw) {
  const int L = nsys.letters();
  std::vector<Mat> E(static_cast<std::size_t>(L * L));
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      Mat S = Mat::Zero(tw.dim(a), nsys.dim(b));
      if (a != inverse(b))
        for (Letter c = 0; c < L; ++c) {
          if (c == a || c == inverse(b)) continue;
          S.noalias() += tw.h(a, inverse(c)) * nsys.B(c) * nsys.h(c, b);
        }
      E[static_cast<std::size_t>(a * L + b)] = std::move(S);
    }
  return E;
}

EquivalenceResult solve_equivalence(const MatrixSystem& s1, const MatrixSystem& s2,
                                    const Tolerances& tol) {
  if (!(s1.alphabet == s2.alphabet)) throw std::invalid_argument("solve_equivalence: alphabets differ");
  const int L = s1.letters();
  auto off = block_offsets(s2.dims, s1.dims);
  const Eigen::Index ncols = off.back();
  Eigen::Index nrows = 0;
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b)
      if (b != inverse(a)) nrows += static_cast<Eigen::Index>(s2.dim(b)) * s1.dim(a);
  Mat A = Mat::Zero(nrows, ncols);
  Eigen::Index r = 0;
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      if (b == inverse(a)) continue;
      const Eigen::Index m = static_cast<Eigen::Index>(s2.dim(b)) * s1.dim(a);
      const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
      // vec(H2 J_a) = kron(I, H2) vec J_a ;  vec(J_b H1) = kron(H1^T, I) vec J_b
      A.block(r, off[ua], m, off[ua + 1] - off[ua]) +=
          kron(Mat::Identity(s1.dim(a), s1.dim(a)), s2.h(b, a));
      A.block(r, off[ub], m, off[ub + 1] - off[ub]) -=
          kron(s1.h(b, a).transpose(), Mat::Identity(s2.dim(b), s2.dim(b)));
      r += m;
    }

  EquivalenceResult res;
  auto ns = nullspace(A, tol.null_rel);
  res.solution_space_dim = static_cast<int>(ns.basis.cols());
  const auto& sv = ns.singular_values;
  const Eigen::Index tail = std::min<Eigen::Index>(4, sv.size());
  res.smallest_singular_values = sv.tail(tail);
  if (res.solution_space_dim == 0) {
    res.status = EquivalenceStatus::inequivalent;
    return res;
  }
  if (res.solution_space_dim >= 2) {
    res.status = EquivalenceStatus::undecided;
    res.diagnostic = "intertwiner space has dimension " + std::to_string(res.solution_space_dim) +
                     "; the inputs cannot both be irreducible";
    return res;
  }
  std::vector<Mat> K(static_cast<std::size_t>(L));
  double kmax = 0;
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    K[ua] = unvec(ns.basis.col(0).segment(off[ua], off[ua + 1] - off[ua]), s2.dim(a), s1.dim(a));
    kmax = std::max(kmax, K[ua].norm());
  }
  bool invertible = true;
  for (Letter a = 0; a < L; ++a) {
    const Mat& k = K[static_cast<std::size_t>(a)];
    if (k.rows() != k.cols()) {
      invertible = false;
      break;
    }
    Eigen::JacobiSVD<Mat> svd(k);
    if (svd.singularValues().minCoeff() <= tol.inv * std::max(1.0, kmax)) invertible = false;
  }
  res.K = std::move(K);
  if (invertible) {
    res.status = EquivalenceStatus::equivalent;
  } else {
    res.status = EquivalenceStatus::undecided;
    res.diagnostic = "one-dimensional intertwiner space with a singular block";
  }
  return res;
}

EquivalenceResult solve_equivalence(const NormalizedSystem& s1, const NormalizedSystem& s2,
                                    const Tolerances& tol) {
  return solve_equivalence(s1.system, s2.system, tol);
}

double k_intertwining_residual(const MatrixSystem& sys, const MatrixSystem& other,
                               const std::vector<Mat>& K) {
  const int L = sys.letters();
  double worst = 0, kn = 0;
  for (const auto& k : K) kn = std::max(kn, k.norm());
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      if (a == inverse(b)) continue;
      Mat d = other.h(a, b) * K[static_cast<std::size_t>(b)] - K[static_cast<std::size_t>(a)] * sys.h(a, b);
      worst = std::max(worst, d.norm());
    }
  return worst / std::max(1e-300, kn);
}

KTuple symmetrize_and_unitarize_K(const std::vector<Mat>& K, const NormalizedSystem& orig,
                                  const NormalizedSystem& tw, const Tolerances& tol) {
  const int L = orig.letters();
  KTuple out;
  std::vector<Mat> herm(static_cast<std::size_t>(L)), anti(static_cast<std::size_t>(L));
  double nh = 0, na = 0;
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const Mat& kinv = K[static_cast<std::size_t>(inverse(a))];
    herm[ua] = 0.5 * (K[ua] + kinv.adjoint());
    anti[ua] = (K[ua] - kinv.adjoint()) / cplx(0, 2);
    nh += herm[ua].squaredNorm();
    na += anti[ua].squaredNorm();
  }
  if (nh == 0 && na == 0) throw NumericalError("symmetrization: both addends vanish");
  out.branch = nh >= na ? 0 : 1;
  out.K = out.branch == 0 ? herm : anti;

  // fix the remaining real sign: the largest entry gets a positive real part
  cplx big = 0;
  for (const auto& k : out.K)
    for (Eigen::Index i = 0; i < k.size(); ++i)
      if (std::abs(k(i)) > std::abs(big) * (1 + 1e-9)) big = k(i);
  const double sgn = (std::abs(big.real()) >= std::abs(big.imag()) ? big.real() : big.imag()) < 0 ? -1.0 : 1.0;
  for (auto& k : out.K) k *= sgn;

  // per-letter form ratios K_a^H B̂_a K_a ~ lambda B_a
  std::vector<double> lam;
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    Mat p = out.K[ua].adjoint() * tw.B(a) * out.K[ua];
    lam.push_back((p.trace() / orig.B(a).trace()).real());
  }
  const double lmin = *std::min_element(lam.begin(), lam.end());
  const double lmax = *std::max_element(lam.begin(), lam.end());
  out.ratio_spread = (lmax - lmin) / std::max(1e-300, std::abs(lmax));
  double mean = 0;
  for (double l : lam) mean += l;
  mean /= static_cast<double>(lam.size());
  if (!(mean > 0)) {
    out.diagnostic = "form ratio not positive; K cannot be made unitary by a scalar";
    return out;
  }
  for (auto& k : out.K) k /= std::sqrt(mean);

  double worst = 0, sym = 0;
  for (Letter a = 0; a < L; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    worst = std::max(worst, (out.K[ua].adjoint() * tw.B(a) * out.K[ua] - orig.B(a)).norm());
    sym = std::max(sym, (out.K[ua].adjoint() - out.K[static_cast<std::size_t>(inverse(a))]).norm());
  }
  out.unitarity_residual = worst / std::max(1e-300, orig.forms.norm());
  out.symmetry_residual = sym;
  out.form_unitary = out.unitarity_residual <= tol.identity;
  if (!out.form_unitary)
    out.diagnostic = "K not form-unitary after scalar rescale (residual " +
                     std::to_string(out.unitarity_residual) + ")";
  return out;
}

TwinPackage make_twin_package(const NormalizedSystem& nsys, const Tolerances& tol) {
  TwinPackage pkg;
  pkg.original = nsys;
  pkg.twin = twin(nsys, tol);
  pkg.E = e_maps(nsys, pkg.twin.system);
  pkg.equivalence = solve_equivalence(nsys, pkg.twin, tol);
  if (pkg.equivalence.status == EquivalenceStatus::equivalent)
    pkg.K = symmetrize_and_unitarize_K(*pkg.equivalence.K, nsys, pkg.twin, tol);
  return pkg;
}

double e_adjoint_residual(const TwinPackage& pkg) {
  const int L = pkg.letters();
  double worst = 0, scale = 0;
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      scale = std::max(scale, pkg.e(a, b).norm());
      worst = std::max(worst, (pkg.e(inverse(b), inverse(a)).adjoint() - pkg.e(a, b)).norm());
    }
  return worst / std::max(1e-300, scale);
}

}  // namespace freerep
