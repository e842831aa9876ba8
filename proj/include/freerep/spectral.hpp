#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "freerep/parallel.hpp"
#include "freerep/twin.hpp"

namespace freerep {

// Four row groups; group g, letter a holds matrices of shape rows x cols:
//   g=0: n̂_a x n̂_a,  g=1: n_a x n̂_a,  g=2: n̂_a x n_a,  g=3: n_a x n_a.
struct DMatrix {
  Mat M;
  std::array<std::vector<int>, 4> rows, cols;
  std::array<std::vector<Eigen::Index>, 4> offset;  // absolute, size L+1
  int letters = 0;

  Eigen::Index side() const { return M.rows(); }
  Eigen::Index group_begin(int g) const { return offset[static_cast<std::size_t>(g)].front(); }
  Eigen::Index group_size(int g) const {
    return offset[static_cast<std::size_t>(g)].back() - offset[static_cast<std::size_t>(g)].front();
  }
  Eigen::Index at(int g, Letter a) const { return offset[static_cast<std::size_t>(g)][static_cast<std::size_t>(a)]; }
  Eigen::Index len(int g, Letter a) const { return at(g, a + 1) - at(g, a); }
  Mat block(int i, Letter a, int j, Letter b) const { return M.block(at(i, a), at(j, b), len(i, a), len(j, b)); }
  Mat diagonal_group(int g) const {
    return M.block(group_begin(g), group_begin(g), group_size(g), group_size(g));
  }
  // stacked group-g vector from per-letter matrices
  Vec pack(int g, const std::vector<Mat>& U) const;
};

DMatrix build_D(const TwinPackage& pkg, Exec exec = Exec::parallel);

// true when the (i,j) block pair is structurally nonzero
bool d_block_printed(int i, int j);

struct EigenOne {
  int mult_one = 0;
  int dim_one = 0;
  double rho_D = 0;
  double gap = 0;                      // distance from 1 to the nearest eigenvalue outside the cluster
  std::array<int, 4> group_mult{};     // cluster count per diagonal group
  RVec singular_tail;                  // smallest singular values of D - I, ascending
  double rank_threshold = 0;
  bool ill_conditioned = false;
  std::vector<int> candidate_dims;     // more than one entry means the rank call is near the threshold
};

// D is block upper triangular, so the spectrum is read off the four
// diagonal groups; the geometric dimension comes from an SVD of D - I.
EigenOne eigen_one(const DMatrix& D, const Tolerances& tol = {});

struct TraceConditions {
  cplx lemma_value = 0;    // Σ tr(K_a^-1 E_ab B̂_{b^-1} H_ab^H B_a)
  cplx twin_value = 0;     // Σ tr(Ĥ_ab B_{b^-1} K_{b^-1}^-1 E_ab^H B̂_a)
  double lemma_scale = 0;
  double twin_scale = 0;
  bool lemma_vanishes = false;
  bool twin_vanishes = false;
};

TraceConditions trace_condition(const TwinPackage& pkg, double rel_tol = 1e-8);

struct QTuple {
  std::vector<Mat> Q;              // Q_a : V_a -> V̂_a
  double residual = 0;             // after antisymmetrization, relative to |E|
  double raw_residual = 0;         // least-squares residual before it
  double antisymmetry_residual = 0;
};

struct QAttempt {
  std::optional<QTuple> q;
  double lsq_residual = 0;  // relative to |E|
};

QAttempt solve_Q(const TwinPackage& pkg, double accept_rel = 1e-9);
// Ĥ_ab Q_b + E_ab - Q_a H_ab, max over pairs, relative to max |E_ab|
double q_equation_residual(const TwinPackage& pkg, const std::vector<Mat>& Q);

std::array<double, 4> diag_eigvec_check(const TwinPackage& pkg, const DMatrix& D);
std::array<std::vector<Mat>, 4> lemma_eigvecs(const TwinPackage& pkg);

enum class ClassLabel { AI, AII, BI, BII };
enum class Verdict { monotony, duplicity, oddity_split, undecided };

const char* to_string(ClassLabel c);
const char* to_string(Verdict v);

struct SpectralReport {
  TwinPackage pkg;
  double rho_D = 0;
  EigenOne eig;
  bool twins_equivalent = false;
  ClassLabel class_label = ClassLabel::AII;
  std::vector<std::string> candidate_labels;  // filled when d = 3/4 is ambiguous
  int predicted_exponent = 2;
  std::optional<TraceConditions> trace;
  QAttempt q;
  std::optional<std::array<double, 4>> diag_residuals;
  Verdict verdict = Verdict::undecided;
  std::vector<std::string> diagnostics;
};

SpectralReport classify(const NormalizedSystem& nsys, const Tolerances& tol = {},
                        Exec exec = Exec::parallel);

int predicted_exponent(ClassLabel c, int dim_one);

}  // namespace freerep
