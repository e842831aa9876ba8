#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "freerep/linalg.hpp"
#include "freerep/word.hpp"

namespace freerep {

// Raised when a numerical certificate cannot be produced (non-PD forms,
// degenerate Perron eigenvalue, unstable rank decision, ...).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The input fails irreducibility: eigenvalue 1 of T is not simple.
class ReducibleSystemError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

struct Tolerances {
  double fix = 1e-10;       // fixed-point residual, relative to tuple norm
  double pd = 1e-9;         // smallest eigenvalue of B, relative to tuple norm
  double null_rel = 1e-8;   // SVD nullspace cutoff, relative to sigma_max
  double delta = 1e-6;      // radius of the eigenvalue-1 cluster of D
  double inv = 1e-10;       // smallest singular value of an invertible block
  double identity = 1e-9;   // residuals of algebraic identities
};

// Maps H_ba : V_a -> V_b stored at H[b * L + a]. The block for b = a^-1 is
// kept as a correctly shaped zero matrix.
struct MatrixSystem {
  Alphabet alphabet;
  std::vector<int> dims;
  std::vector<Mat> H;

  int letters() const noexcept { return alphabet.size(); }
  const Mat& h(Letter b, Letter a) const { return H[static_cast<std::size_t>(b * letters() + a)]; }
  Mat& h(Letter b, Letter a) { return H[static_cast<std::size_t>(b * letters() + a)]; }
  int dim(Letter a) const { return dims[static_cast<std::size_t>(a)]; }

  static MatrixSystem zero(Alphabet alphabet, std::vector<int> dims);
};

struct FormTuple {
  std::vector<Mat> B;
  double norm() const;  // Frobenius norm of the stacked tuple
};

struct NormalizedSystem {
  MatrixSystem system;
  FormTuple forms;
  double rho_certificate = 1.0;  // transfer radius after scaling
  double input_scale = 1.0;      // H was multiplied by this
  bool irreducible = true;
  int power_iterations = 0;
  bool used_direct_solve = false;

  int letters() const noexcept { return system.letters(); }
  int dim(Letter a) const { return system.dim(a); }
  const Mat& h(Letter b, Letter a) const { return system.h(b, a); }
  const Mat& B(Letter a) const { return forms.B[static_cast<std::size_t>(a)]; }
};

struct Diagnostic {
  std::string code;     // "shape", "inverse-pair", "nonzero", "finite", "dims", "zero-system"
  std::string message;
  std::optional<std::pair<Letter, Letter>> where;  // (b, a)
};

std::vector<Diagnostic> validate(const MatrixSystem& sys);

enum class Irreducibility { irreducible, reducible, undecided };

struct IrreducibilityReport {
  Irreducibility status = Irreducibility::undecided;
  int rounds = 0;
  std::vector<int> span_dims;  // [b * L + a]
};

IrreducibilityReport irreducibility(const MatrixSystem& sys);
bool is_irreducible(const MatrixSystem& sys);

FormTuple transfer_apply(const MatrixSystem& sys, const FormTuple& t);
// Vectorized T acting on stacked vec(t_a), blocks ordered by letter.
Mat transfer_matrix(const MatrixSystem& sys);
double spectral_radius_T(const MatrixSystem& sys);

MatrixSystem scaled(const MatrixSystem& sys, double s);
double compatibility_residual(const MatrixSystem& sys, const FormTuple& forms);

NormalizedSystem normalize(const MatrixSystem& sys, const Tolerances& tol = {});

// Generic vectorized tuple layout: offsets of blocks rows[a] x cols[a].
std::vector<Eigen::Index> block_offsets(const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace freerep
