#pragma once

#include <optional>
#include <string>
#include <vector>

#include "freerep/matrix_system.hpp"

namespace freerep {

// Twin data: spaces V̂_a = V*_{a^-1}, maps Ĥ_ba = (H_{a^-1 b^-1})^H in the
// conjugate-dual basis. Pure data transform, no normalization.
MatrixSystem twin_system(const MatrixSystem& sys);

// Twin with its own Perron forms (same trace convention).
NormalizedSystem twin(const NormalizedSystem& nsys, const Tolerances& tol = {});

// E_ab : V_b -> V̂_a stored at [a * L + b]; zero block when ab = e.
std::vector<Mat> e_maps(const NormalizedSystem& nsys, const MatrixSystem& twin);

enum class EquivalenceStatus { equivalent, inequivalent, undecided };

struct EquivalenceResult {
  EquivalenceStatus status = EquivalenceStatus::undecided;
  std::optional<std::vector<Mat>> K;  // J_a : V_a -> V'_a
  int solution_space_dim = 0;
  RVec smallest_singular_values;      // tail of the constraint spectrum
  std::string diagnostic;
};

// Nullspace of (J_a) -> (H2_ba J_a - J_b H1_ba).
EquivalenceResult solve_equivalence(const MatrixSystem& s1, const MatrixSystem& s2,
                                    const Tolerances& tol = {});
EquivalenceResult solve_equivalence(const NormalizedSystem& s1, const NormalizedSystem& s2,
                                    const Tolerances& tol = {});

struct KTuple {
  std::vector<Mat> K;         // K_a : V_a -> V̂_a, K_a^H = K_{a^-1}
  int branch = 0;             // 0: (K + K*)/2, 1: (K - K*)/(2i)
  double symmetry_residual = 0;
  double unitarity_residual = 0;  // max_a |K_a^H B̂_a K_a - B_a| / |B|
  double ratio_spread = 0;        // spread of the per-letter form ratios before rescale
  bool form_unitary = false;
  std::string diagnostic;
};

KTuple symmetrize_and_unitarize_K(const std::vector<Mat>& K, const NormalizedSystem& orig,
                                  const NormalizedSystem& twin, const Tolerances& tol = {});

struct TwinPackage {
  NormalizedSystem original;
  NormalizedSystem twin;
  std::vector<Mat> E;  // [a * L + b]
  EquivalenceResult equivalence;
  std::optional<KTuple> K;

  int letters() const noexcept { return original.letters(); }
  const Mat& e(Letter a, Letter b) const { return E[static_cast<std::size_t>(a * letters() + b)]; }
  bool twins_equivalent() const noexcept { return equivalence.status == EquivalenceStatus::equivalent; }
};

TwinPackage make_twin_package(const NormalizedSystem& nsys, const Tolerances& tol = {});

// max over (a,b) of |E*_{b^-1 a^-1} - E_ab|, relative to max |E|
double e_adjoint_residual(const TwinPackage& pkg);
// max over (a,b) of |Ĥ_ab K_b - K_a H_ab| relative to |K|
double k_intertwining_residual(const MatrixSystem& sys, const MatrixSystem& other,
                               const std::vector<Mat>& K);

}  // namespace freerep
