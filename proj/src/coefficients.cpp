#include "freerep/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace freerep {

int native_depth(const EdgeTerm& t) {
  const int h = t.head().length();
  return std::max(0, std::max(t.tail.length(), h) - 1);
}

std::vector<EdgeTerm> MultiplicativeFunction::terms() const {
  std::vector<EdgeTerm> out;
  out.reserve(coeffs.size());
  for (const auto& [head, v] : coeffs) {
    std::vector<Letter> t(head.letters().begin(), head.letters().end() - 1);
    out.push_back({Word(t), head.back(), v});
  }
  return out;
}

Vec mu_eval(const MatrixSystem& sys, const Word& tail, Letter letter, const Vec& v, const Word& y) {
  const Word w = multiply(tail.inverse(), y);
  if (w.empty() || w.front() != letter) return Vec::Zero(sys.dim(letter));
  Vec u = v;
  for (int i = 1; i < w.length(); ++i) u = sys.h(w[i], w[i - 1]) * u;
  return u;
}

namespace {

// Walk away from the tail, one letter at a time, reporting values at the
// level-(N+1) vertices entered outward. Values are matrices so whole
// blocks of basis columns travel together.
template <class Visit>
void walk(const MatrixSystem& sys, std::vector<Letter>& y, Letter in, const Mat& u, int N, bool outward,
          Visit& visit) {
  const int len = static_cast<int>(y.size());
  if (len == N + 1 && outward) {
    visit(y, u);
    return;
  }
  for (Letter d = 0; d < sys.letters(); ++d) {
    if (d == inverse(in)) continue;
    const Mat next = sys.h(d, in) * u;
    const bool out = y.empty() || y.back() != inverse(d);
    if (out)
      y.push_back(d);
    else
      y.pop_back();
    walk(sys, y, d, next, N, out, visit);
    if (out)
      y.pop_back();
    else
      y.push_back(inverse(d));
  }
}

template <class Visit>
void canonical_blocks(const MatrixSystem& sys, const Word& tail, Letter letter, const Mat& value, int N,
                      Visit&& visit) {
  EdgeTerm probe{tail, letter, Vec()};
  if (N < native_depth(probe))
    throw std::invalid_argument("canonicalize: depth " + std::to_string(N) + " below native depth " +
                                std::to_string(native_depth(probe)));
  const Word h = probe.head();
  std::vector<Letter> y(h.letters().begin(), h.letters().end());
  const bool outward = h.length() == tail.length() + 1;
  walk(sys, y, letter, value, N, outward, visit);
}

}  // namespace

void for_each_canonical_block(const MatrixSystem& sys, const Word& tail, Letter letter, const Mat& value, int N,
                              const std::function<void(const std::vector<Letter>& head, const Mat& u)>& visit) {
  canonical_blocks(sys, tail, letter, value, N, visit);
}

void for_each_canonical(const MatrixSystem& sys, const EdgeTerm& t, int N,
                        const std::function<void(const Word& head, const Vec& value)>& visit) {
  auto v = [&](const std::vector<Letter>& y, const Mat& u) { visit(Word(y), u.col(0)); };
  canonical_blocks(sys, t.tail, t.letter, Mat(t.value), N, v);
}

MultiplicativeFunction canonicalize(const MatrixSystem& sys, const std::vector<EdgeTerm>& terms, int N) {
  MultiplicativeFunction f;
  f.depth = N;
  for (const auto& t : terms) {
    if (t.value.size() != sys.dim(t.letter)) throw std::invalid_argument("canonicalize: value has wrong size");
    for_each_canonical(sys, t, N, [&](const Word& head, const Vec& v) {
      auto it = f.coeffs.find(head);
      if (it == f.coeffs.end())
        f.coeffs.emplace(head, v);
      else
        it->second += v;
    });
  }
  return f;
}

MultiplicativeFunction canonicalize(const MatrixSystem& sys, const MultiplicativeFunction& f, int N) {
  if (N < f.depth) throw std::invalid_argument("canonicalize: cannot lower the depth of a family");
  if (N == f.depth) return f;
  return canonicalize(sys, f.terms(), N);
}

cplx inner_product(const NormalizedSystem& ns, const MultiplicativeFunction& f, const MultiplicativeFunction& g) {
  const int N = std::max(f.depth, g.depth);
  const auto F = canonicalize(ns.system, f, N);
  const auto G = canonicalize(ns.system, g, N);
  cplx s = 0;
  for (const auto& [head, v] : F.coeffs) {
    auto it = G.coeffs.find(head);
    if (it != G.coeffs.end()) s += v.dot(ns.B(head.back()) * it->second);
  }
  return s;
}

double norm(const NormalizedSystem& ns, const MultiplicativeFunction& f) {
  return std::sqrt(std::max(0.0, inner_product(ns, f, f).real()));
}

MultiplicativeFunction act(const MatrixSystem& sys, const Word& y, const MultiplicativeFunction& f) {
  if (y.empty()) return f;
  std::vector<EdgeTerm> ts = f.terms();
  for (auto& t : ts) t.tail = multiply(y, t.tail);
  return canonicalize(sys, ts, f.depth + y.length());
}

MultiplicativeFunction act_indicator(const MatrixSystem& sys, const Word& x, const MultiplicativeFunction& f) {
  const int N = std::max(f.depth, x.length() - 1);
  MultiplicativeFunction g = canonicalize(sys, f, N);
  for (auto it = g.coeffs.begin(); it != g.coeffs.end();) {
    if (!in_cone(x, it->first))
      it = g.coeffs.erase(it);
    else
      ++it;
  }
  return g;
}

namespace {

// First letter of reduced(t^-1 y) or -1 when it is empty.
Letter first_step(const Word& t, const Word& y) {
  const int p = common_prefix(t, y);
  if (p < t.length()) return inverse(t[t.length() - 1]);
  if (p < y.length()) return y[p];
  return -1;
}

bool in_half(const Word& t, Letter l, const Word& y) { return first_step(t, y) == l; }

}  // namespace

cplx elementary_inner(const NormalizedSystem& ns, const EdgeTerm& e1, const EdgeTerm& e2) {
  const auto& S = ns.system;
  const Word h1 = e1.head(), h2 = e2.head();
  if (e1.tail == e2.tail && e1.letter == e2.letter) return e1.value.dot(ns.B(e1.letter) * e2.value);
  if (h1 == e2.tail && h2 == e1.tail) return 0.0;
  if (in_half(e1.tail, e1.letter, e2.tail) && in_half(e1.tail, e1.letter, h2)) {
    if (distance(h2, e1.tail) > distance(e2.tail, e1.tail)) {
      // edge 2 sits inside the half-tree of edge 1 and points away from it
      Vec m1 = mu_eval(S, e1.tail, e1.letter, e1.value, h2);
      return m1.dot(ns.B(e2.letter) * e2.value);
    }
    // facing edges: the supports meet along the geodesic h1 -> h2
    const Word g = multiply(h1.inverse(), h2);
    const int m = g.length();
    std::vector<Vec> v1(static_cast<std::size_t>(m) + 1), v2(static_cast<std::size_t>(m) + 1);
    std::vector<Letter> in1(static_cast<std::size_t>(m) + 1), in2(static_cast<std::size_t>(m) + 1);
    v1[0] = e1.value;
    in1[0] = e1.letter;
    for (int j = 0; j < m; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      v1[uj + 1] = S.h(g[j], in1[uj]) * v1[uj];
      in1[uj + 1] = g[j];
    }
    v2[static_cast<std::size_t>(m)] = e2.value;
    in2[static_cast<std::size_t>(m)] = e2.letter;
    for (int j = m; j > 0; --j) {
      const auto uj = static_cast<std::size_t>(j);
      const Letter s = inverse(g[j - 1]);
      v2[uj - 1] = S.h(s, in2[uj]) * v2[uj];
      in2[uj - 1] = s;
    }
    cplx tot = 0;
    for (int j = 0; j <= m; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      for (Letter l = 0; l < S.letters(); ++l) {
        if (l == inverse(in1[uj]) || l == inverse(in2[uj])) continue;
        tot += (S.h(l, in1[uj]) * v1[uj]).dot(ns.B(l) * (S.h(l, in2[uj]) * v2[uj]));
      }
    }
    return tot;
  }
  if (in_half(e2.tail, e2.letter, e1.tail) && in_half(e2.tail, e2.letter, h1) &&
      distance(h1, e2.tail) > distance(e1.tail, e2.tail)) {
    Vec m2 = mu_eval(S, e2.tail, e2.letter, e2.value, h1);
    return e1.value.dot(ns.B(e1.letter) * m2);
  }
  return 0.0;
}

EdgeSpace::EdgeSpace(const std::vector<int>& dims, int depth)
    : L_(static_cast<int>(dims.size())), depth_(depth), dims_(dims) {
  if (depth < 0) throw std::invalid_argument("EdgeSpace: negative depth");
  heads_.reserve(sphere_size(L_, depth + 1));
  for_each_in_sphere(L_, depth + 1, [&](const std::vector<Letter>& w) { heads_.emplace_back(w); });
  offset_.assign(heads_.size() + 1, 0);
  for (std::size_t e = 0; e < heads_.size(); ++e)
    offset_[e + 1] = offset_[e] + dims_[static_cast<std::size_t>(heads_[e].back())];
}

std::size_t EdgeSpace::index_of(const Word& head) const {
  if (head.length() != depth_ + 1) throw std::invalid_argument("EdgeSpace: head has wrong length");
  std::size_t idx = static_cast<std::size_t>(head[0]);
  for (int i = 1; i < head.length(); ++i) {
    const Letter c = head[i], p = head[i - 1];
    idx = idx * static_cast<std::size_t>(L_ - 1) + static_cast<std::size_t>(c - (c > inverse(p) ? 1 : 0));
  }
  return idx;
}

Vec EdgeSpace::to_dense(const MultiplicativeFunction& f) const {
  if (f.depth != depth_) throw std::invalid_argument("to_dense: depth mismatch");
  Vec v = Vec::Zero(dim());
  for (const auto& [head, c] : f.coeffs) {
    const std::size_t e = index_of(head);
    v.segment(offset_[e], c.size()) = c;
  }
  return v;
}

MultiplicativeFunction EdgeSpace::from_dense(const Vec& v) const {
  MultiplicativeFunction f;
  f.depth = depth_;
  for (std::size_t e = 0; e < heads_.size(); ++e) {
    Vec c = v.segment(offset_[e], offset_[e + 1] - offset_[e]);
    if (c.cwiseAbs().maxCoeff() != 0.0) f.coeffs.emplace(heads_[e], std::move(c));
  }
  return f;
}

Mat EdgeSpace::gram(const FormTuple& forms) const {
  Mat G = Mat::Zero(dim(), dim());
  for (std::size_t e = 0; e < heads_.size(); ++e) {
    const int n = edge_dim(e);
    G.block(offset_[e], offset_[e], n, n) = forms.B[static_cast<std::size_t>(letter(e))];
  }
  return G;
}

Mat pi_matrix(const MatrixSystem& sys, const Word& y, const EdgeSpace& from, const EdgeSpace& to) {
  if (to.depth() < from.depth() + y.length()) throw std::invalid_argument("pi_matrix: target depth too small");
  Mat P = Mat::Zero(to.dim(), from.dim());
  for (std::size_t e = 0; e < from.edges(); ++e) {
    const Word& h = from.head(e);
    std::vector<Letter> t(h.letters().begin(), h.letters().end() - 1);
    const Word tail = multiply(y, Word(t));
    const int n = from.edge_dim(e);
    canonical_blocks(sys, tail, h.back(), Mat::Identity(n, n), to.depth(),
                     [&](const std::vector<Letter>& w, const Mat& u) {
                       const std::size_t f = to.index_of(Word(w));
                       P.block(to.offset(f), from.offset(e), u.rows(), n) += u;
                     });
  }
  return P;
}

Mat indicator_matrix(const EdgeSpace& space, const Word& x) {
  if (space.depth() < x.length() - 1) throw std::invalid_argument("indicator_matrix: depth too small");
  Mat M = Mat::Zero(space.dim(), space.dim());
  for (std::size_t e = 0; e < space.edges(); ++e)
    if (in_cone(x, space.head(e)))
      M.block(space.offset(e), space.offset(e), space.edge_dim(e), space.edge_dim(e)).setIdentity();
  return M;
}

}  // namespace freerep
