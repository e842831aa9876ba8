#include "freerep/linalg.hpp"

#include <algorithm>

namespace freerep {

Vec vec(const Mat& S) { return Eigen::Map<const Vec>(S.data(), S.size()); }

Mat unvec(const Eigen::Ref<const Vec>& v, Eigen::Index rows, Eigen::Index cols) {
  Mat S(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) S(i, j) = v(j * rows + i);
  return S;
}

Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Nullspace nullspace(const Mat& A, double rel) {
  Nullspace ns;
  const Eigen::Index n = A.cols();
  if (n == 0) return ns;
  // Pad to at least square so the full V is available.
  Mat M = A;
  if (M.rows() < n) {
    M.conservativeResize(n, n);
    M.bottomRows(n - A.rows()).setZero();
  }
  Eigen::BDCSVD<Mat> svd(M, Eigen::ComputeFullV);
  ns.singular_values = svd.singularValues();
  const double smax = ns.singular_values.size() ? ns.singular_values(0) : 0.0;
  ns.threshold = rel * smax;
  Eigen::Index r = 0;
  while (r < ns.singular_values.size() && ns.singular_values(r) > ns.threshold) ++r;
  ns.basis = svd.matrixV().rightCols(n - r);
  return ns;
}

int numeric_rank(const Mat& A, double rel) {
  if (A.size() == 0) return 0;
  Eigen::BDCSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  while (r < s.size() && s(r) > rel * s(0)) ++r;
  return r;
}

double max_abs(const Mat& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

double rel_diff(const Mat& A, const Mat& B) {
  return (A - B).norm() / std::max(1.0, B.norm());
}

}  // namespace freerep
