#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "freerep/coefficients.hpp"
#include "freerep/spectral.hpp"

namespace freerep {

// Edge-local operator T: μ[x, xc, v] -> μ̂[x, xc, X_c v] + μ̂[xc, x, Y_c v]
// with X_c : V_c -> V̂_c and Y_c : V_c -> V̂_{c^-1}.
struct EdgeMaps {
  std::vector<Mat> X;
  std::vector<Mat> Y;
};

// J for classes AI and BI: X = -Q, Y = B. On V_a ⊕ V_{a^-1} the pair block is
// [[-Q_a, B_{a^-1}], [B_a, -Q_{a^-1}]].
struct Intertwiner {
  NormalizedSystem original;
  NormalizedSystem twin;            // forms rescaled so the inverse has twin-side shape
  std::vector<Mat> Q;
  std::vector<Mat> Qhat;            // Q̂_a = B_a^-1 Q_a^H B̂_a : V̂_a -> V_a
  std::optional<std::vector<Mat>> K;  // present in class BI, form-unitary against the rescaled B̂
  double beta = 1;                  // rescale applied to the twin's Perron forms
  double bhat_residual = 0;         // closed-form B̂ vs beta * Perron forms, relative

  int letters() const noexcept { return original.letters(); }
  EdgeMaps maps() const;
  // Pair blocks for a even (a, a^-1 = a + 1).
  Mat block(Letter a) const;
  Mat inverse_block(Letter a) const;
};

// Refuses reports without a Q tuple (classes AII and BII).
Intertwiner build_J(const SpectralReport& rep);
Intertwiner build_J(const TwinPackage& pkg, const std::vector<Mat>& Q);

struct InverseResiduals {
  double left_identity = 0;     // Q̂_a Q_a + B̂_{a^-1} B_a = Id
  double bq = 0;                // B̂_a Q_a + Q̂_{a^-1} B_a = 0
  double qb = 0;                // Q_{a^-1} B̂_a + B_a Q̂_a = 0
  double closed_vs_numeric = 0; // closed-form inverse block vs numeric inverse
  double max() const;
};

InverseResiduals verify_inverse_relations(const Intertwiner& J);

// Dense matrix of an edge-local operator between canonical coordinates.
Mat edge_operator_matrix(const EdgeMaps& m, const MatrixSystem& target, const EdgeSpace& from,
                         const EdgeSpace& to);
// Edge-wise blocks M_a on every coefficient (used for 𝒦 and its inverse).
Mat blockwise_matrix(const std::vector<Mat>& M, const EdgeSpace& from, const EdgeSpace& to);

Mat j_matrix(const Intertwiner& J, int depth);

struct WResiduals {
  int depth = 0;
  double isometry = 0;      // |J^H Ĝ J - G| / |G| on W_depth
  double intertwining = 0;  // max_y |J π(y) - π̂(y) J| / |J| from W_depth to W_{depth+1}
  double form_scale = 1;    // tr(J^H Ĝ J) / tr(G)
};

WResiduals verify_isometry_and_intertwining(const Intertwiner& J, int depth, Exec exec = Exec::parallel);
// Same checks for any edge-local operator; the isometry entry is left at 0.
double intertwining_residual(const EdgeMaps& m, const NormalizedSystem& orig, const NormalizedSystem& twin,
                             int depth, Exec exec = Exec::parallel);

// Telescoping identity on all reduced words a_1 .. a_{n+1}, n = 1 .. nmax:
// H...H Q̂_{a_1} - Q̂_{a_{n+1}} Ĥ...Ĥ + Σ_j H...H Ê_{a_{j+2} a_{j+1}} Ĥ...Ĥ = 0.
// Returns the worst residual relative to the largest term.
double fin_residual(const Intertwiner& J, int nmax = 4);

struct FamilyMember {
  EdgeMaps maps;
  double lambda = 1;
  double c = 0;
  double intertwining_residual = 0;  // on W_2
};

// X_a = -λQ_a + icK_a, Y_a = λB_a. Without K only c = 0 is allowed.
FamilyMember general_intertwiner_family(const Intertwiner& J, double lambda, double c);

struct SplitReport {
  double c = 0;
  double c_imag = 0;           // imaginary part of i(λ+ + λ-) before it is dropped
  cplx lambda_plus = 0;
  cplx lambda_minus = 0;
  cplx lambda_constant = 0;    // -λ+λ-, expected 1
  double unimodularity = 0;    // max over clusters of ||λ| - 1|
  double cluster_spread = 0;   // max distance of an eigenvalue of M from its cluster mean
  double quadratic = 0;        // max over pairs |M^2 + icM - Id|
  std::vector<Mat> P_plus, P_minus;  // per pair, index a / 2
  std::vector<int> dim_plus, dim_minus;
  double idempotency = 0;
  double orthogonality = 0;
  double completeness = 0;
  double form_hermitian = 0;   // G P - P^H G with G = diag(B_a, B_{a^-1})
  double commutation = 0;      // |P± π(y) - π(y) P±| on W_2, relative
  double operator_involution = 0;  // |𝒥_2^2 - Id| on W_2
  bool ok = false;
  std::string diagnostic;
};

SplitReport split(const Intertwiner& J, double tol = 1e-9);

struct RankProfile {
  Letter a = 0, b = 0;
  std::vector<int> depths;
  std::vector<int> rank;
  std::vector<double> hs_norm;   // Hilbert-Schmidt norm for the forms G, Ĝ
  int bound = 0;                 // dim V̂_b
  bool within_bound = false;
  bool stabilizes = false;       // non-increasing, constant over the last two depths
};

// Rank of π̂(1_b) J π(1_a) on W_n for n = nmin .. nmax.
RankProfile finite_rank_check(const Intertwiner& J, Letter a, Letter b, int nmin, int nmax,
                              std::uint64_t seed = 1);

}  // namespace freerep
