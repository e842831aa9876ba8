#pragma once

#include <functional>
#include <map>
#include <vector>

#include "freerep/matrix_system.hpp"
#include "freerep/word.hpp"

namespace freerep {

// μ[tail, tail·letter, value]: value sits on the edge, then propagates by
// products of H into the half-tree on the head side.
struct EdgeTerm {
  Word tail;
  Letter letter = 0;
  Vec value;

  Word head() const { return tail.times(letter); }
};

// Smallest depth N at which the term is a single canonical family.
int native_depth(const EdgeTerm& t);

// Canonical depth-N family: coefficient f(xa) for edges (x, xa) with |x| = N
// and |xa| = N + 1, keyed by the head word xa. Missing keys are zero.
struct MultiplicativeFunction {
  int depth = 0;
  std::map<Word, Vec> coeffs;

  std::vector<EdgeTerm> terms() const;
};

Vec mu_eval(const MatrixSystem& sys, const Word& tail, Letter letter, const Vec& v, const Word& y);

// Visits every canonical coefficient of a single term at depth N.
void for_each_canonical(const MatrixSystem& sys, const EdgeTerm& t, int N,
                        const std::function<void(const Word& head, const Vec& value)>& visit);

// Matrix-valued version: value has n_letter rows and any number of columns,
// so a whole basis travels in one walk.
void for_each_canonical_block(const MatrixSystem& sys, const Word& tail, Letter letter, const Mat& value, int N,
                              const std::function<void(const std::vector<Letter>& head, const Mat& u)>& visit);

MultiplicativeFunction canonicalize(const MatrixSystem& sys, const std::vector<EdgeTerm>& terms, int N);
MultiplicativeFunction canonicalize(const MatrixSystem& sys, const MultiplicativeFunction& f, int N);

cplx inner_product(const NormalizedSystem& ns, const MultiplicativeFunction& f,
                   const MultiplicativeFunction& g);
double norm(const NormalizedSystem& ns, const MultiplicativeFunction& f);

// π(y): relabels every edge by left multiplication with y.
MultiplicativeFunction act(const MatrixSystem& sys, const Word& y, const MultiplicativeFunction& f);
// π(1_x): keeps the part of f supported on the cone Γ(x).
MultiplicativeFunction act_indicator(const MatrixSystem& sys, const Word& x, const MultiplicativeFunction& f);

// Closed-form ⟨μ1, μ2⟩ of two elementary terms, no canonicalization.
cplx elementary_inner(const NormalizedSystem& ns, const EdgeTerm& t1, const EdgeTerm& t2);

// Dense coordinates of W_N: edges ordered like the sphere of radius N+1,
// each contributing n_{last letter} coordinates.
class EdgeSpace {
public:
  EdgeSpace(const std::vector<int>& dims, int depth);

  int depth() const noexcept { return depth_; }
  int letters() const noexcept { return L_; }
  std::size_t edges() const noexcept { return heads_.size(); }
  Eigen::Index dim() const noexcept { return offset_.back(); }
  const Word& head(std::size_t e) const { return heads_[e]; }
  Letter letter(std::size_t e) const { return heads_[e].back(); }
  Eigen::Index offset(std::size_t e) const { return offset_[e]; }
  int edge_dim(std::size_t e) const { return dims_[static_cast<std::size_t>(letter(e))]; }
  std::size_t index_of(const Word& head) const;

  Vec to_dense(const MultiplicativeFunction& f) const;
  MultiplicativeFunction from_dense(const Vec& v) const;
  // Block-diagonal Gram matrix diag(B_{letter}) of the inner product.
  Mat gram(const FormTuple& forms) const;

private:
  int L_ = 0;
  int depth_ = 0;
  std::vector<int> dims_;
  std::vector<Word> heads_;
  std::vector<Eigen::Index> offset_;
};

// Matrix of π(y) : W_N -> W_{N+|y|}.
Mat pi_matrix(const MatrixSystem& sys, const Word& y, const EdgeSpace& from, const EdgeSpace& to);
// Diagonal 0/1 matrix of π(1_x) on W_N; needs N >= |x| - 1.
Mat indicator_matrix(const EdgeSpace& space, const Word& x);

}  // namespace freerep
