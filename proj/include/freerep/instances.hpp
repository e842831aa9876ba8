#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "freerep/matrix_system.hpp"
#include "freerep/spectral.hpp"

namespace freerep {

// All maps equal to 1/sqrt(2k-1) on one-dimensional letters; with scale
// false the maps are 1 (transfer radius 2k-1).
MatrixSystem endpoint_system(int k = 2, bool normalized = true);

// Dense complex Gaussian entries.
MatrixSystem random_system(int k, const std::vector<int>& dims, std::mt19937_64& rng);

// H_{b^-1 a^-1} = (H_ab)^H, which makes the system its own twin (K = I).
// Requires n_a = n_{a^-1}.
MatrixSystem random_twin_symmetric(int k, const std::vector<int>& dims, std::mt19937_64& rng);

struct SearchOptions {
  int max_iterations = 400;
  double target = 1e-13;  // residual of the Q equation relative to |E|
};

struct SearchResult {
  MatrixSystem system;  // normalized maps
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

// Damped Gauss-Newton on the joint unknowns (H, Q) for the Q equation
// Ĥ_ab Q_b + E_ab(H) = Q_a H_ab with Q_{a^-1} = -Q_a^H. With twin_symmetric
// the maps keep the H_{b^-1 a^-1} = H_ab^H structure.
SearchResult search_q_solvable(int k, const std::vector<int>& dims, bool twin_symmetric,
                               std::mt19937_64& rng, const SearchOptions& opt = {});

struct GeneratedInstance {
  NormalizedSystem nsys;
  SpectralReport report;
  std::uint64_t seed = 0;   // seed of the successful attempt
  int attempts = 0;
};

// Seeded search for an AI (twin_symmetric = false) or BI instance. Each
// attempt uses seed + attempt; the first that converges, is irreducible
// and classifies to the wanted label with a decided verdict is returned.
std::optional<GeneratedInstance> generate_class_one(ClassLabel want, int k, const std::vector<int>& dims,
                                                    std::uint64_t seed, int max_attempts = 20,
                                                    const Tolerances& tol = {});

}  // namespace freerep
