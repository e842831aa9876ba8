#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace freerep {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Column-stacking vectorization. vec(X S Y^H) = kron(conj(Y), X) vec(S).
Vec vec(const Mat& S);
Mat unvec(const Eigen::Ref<const Vec>& v, Eigen::Index rows, Eigen::Index cols);
Mat kron(const Mat& A, const Mat& B);

struct Nullspace {
  Mat basis;                 // orthonormal columns
  RVec singular_values;      // descending, all of them
  double threshold = 0.0;    // absolute cutoff used
};
// Right nullspace of A using the cutoff rel * sigma_max. Columns of A may
// outnumber rows; the missing singular values count as zero.
Nullspace nullspace(const Mat& A, double rel);

int numeric_rank(const Mat& A, double rel);

double max_abs(const Mat& A);
double rel_diff(const Mat& A, const Mat& B);  // |A-B|_F / max(1, |B|_F)

}  // namespace freerep
