#include "freerep/series.hpp"

#include <algorithm>
#include <cfloat>
#include <atomic>
#include <cmath>
#include <numeric>

namespace freerep {

namespace {
std::atomic<std::uint64_t> g_haagerup_checks{0};

using RowVec = Eigen::Matrix<cplx, 1, Eigen::Dynamic>;

// Neumaier summation; spheres hold up to millions of terms.
struct Sum {
  double s = 0, c = 0;
  void add(double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

// Direct evaluation of |<v, pi(x) w>|^2 from the closed-form edge kernel.
double direct_term(const NormalizedSystem& ns, const std::vector<EdgeTerm>& vt, const std::vector<EdgeTerm>& wt,
                   const std::vector<Letter>& xl) {
  const Word x(xl);
  cplx c = 0;
  for (const auto& b : wt) {
    EdgeTerm moved{multiply(x, b.tail), b.letter, b.value};
    for (const auto& a : vt) c += elementary_inner(ns, a, moved);
  }
  return std::norm(c);
}

// State carried at a vertex p with |p| > depth(v):
//   mu  = value of v at p,
//   rho = row vector with <v, mu[p, parent(p), u]> = rho * u,
//   g[d] = (H_{d,last} mu)^* B_d, so <v, mu[p, pd, u]> = g[d] * u.
struct Node {
  Letter last = -1;
  Vec mu;
  RowVec rho;
  std::vector<RowVec> g;
};

class Memo {
public:
  Memo(const NormalizedSystem& ns, const MultiplicativeFunction& v, const std::vector<EdgeTerm>& vt,
       const std::vector<EdgeTerm>& wt)
      : ns_(ns), v_(v), vt_(vt), wt_(wt), L_(ns.letters()) {
    max_tail_ = 0;
    for (const auto& t : wt_) max_tail_ = std::max(max_tail_, t.tail.length());
  }

  // Shortest sphere radius handled by the memoized path.
  int min_radius() const { return v_.depth + 1 + max_tail_; }

  Node base(const std::vector<Letter>& p) const {
    Node n;
    n.last = p.back();
    const Word pw(p);
    auto it = v_.coeffs.find(pw);
    n.mu = it == v_.coeffs.end() ? Vec::Zero(ns_.system.dim(n.last)) : it->second;
    const Letter back = inverse(n.last);
    const int m = ns_.system.dim(back);
    n.rho = RowVec::Zero(m);
    for (int i = 0; i < m; ++i) {
      EdgeTerm e{pw, back, Vec::Unit(m, i)};
      cplx s = 0;
      for (const auto& a : vt_) s += elementary_inner(ns_, a, e);
      n.rho(i) = s;
    }
    fill_g(n);
    return n;
  }

  // Writes the state of p·c into n, reusing its storage.
  void child(const Node& p, Letter c, Node& n) const {
    n.last = c;
    n.mu.noalias() = ns_.h(c, p.last) * p.mu;
    const Letter back = inverse(p.last);
    n.rho.noalias() = p.rho * ns_.h(back, inverse(c));
    for (Letter d = 0; d < L_; ++d)
      if (d != c && d != back) n.rho.noalias() += p.g[static_cast<std::size_t>(d)] * ns_.h(d, inverse(c));
    fill_g(n);
  }

  // <v, pi(x) w> with the states of the prefixes of x in stack[0..|x|-1]
  // (stack[j] belongs to the prefix of length j + 1; entries below
  // depth(v) are unused).
  cplx coefficient(const std::vector<Letter>& x, const std::vector<Node>& stack) const {
    const int n = static_cast<int>(x.size());
    cplx c = 0;
    for (const auto& t : wt_) {
      const int tl = t.tail.length();
      int r = 0;
      while (r < tl && r < n && t.tail[r] == inverse(x[static_cast<std::size_t>(n - 1 - r)])) ++r;
      const Node* z = &stack[static_cast<std::size_t>(n - r - 1)];
      Node tmp[2];
      for (int i = r; i < tl; ++i) {
        Node& next = tmp[(i - r) % 2];
        child(*z, t.tail[i], next);
        z = &next;
      }
      if (t.letter == inverse(z->last))
        c += (z->rho * t.value)(0);
      else
        c += (z->g[static_cast<std::size_t>(t.letter)] * t.value)(0);
    }
    return c;
  }

private:
  void fill_g(Node& n) const {
    n.g.resize(static_cast<std::size_t>(L_));
    for (Letter d = 0; d < L_; ++d)
      if (d != inverse(n.last))
        n.g[static_cast<std::size_t>(d)].noalias() = (ns_.h(d, n.last) * n.mu).adjoint() * ns_.B(d);
  }

  const NormalizedSystem& ns_;
  const MultiplicativeFunction& v_;
  const std::vector<EdgeTerm>& vt_;
  const std::vector<EdgeTerm>& wt_;
  int L_;
  int max_tail_ = 0;
};

// Depth-first walk below the prefix x, extending the node stack one letter
// at a time; calls leaf(x, stack) at radius n.
template <class Leaf>
void walk(const Memo& memo, int dv, int n, std::vector<Letter>& x, std::vector<Node>& stack, int L, Leaf& leaf) {
  const int j = static_cast<int>(x.size());
  if (j == n) {
    leaf(x, stack);
    return;
  }
  for (Letter c = 0; c < L; ++c) {
    if (j > 0 && c == inverse(x.back())) continue;
    x.push_back(c);
    if (j + 1 == dv + 1)
      stack[static_cast<std::size_t>(j)] = memo.base(x);
    else if (j + 1 > dv + 1)
      memo.child(stack[static_cast<std::size_t>(j - 1)], c, stack[static_cast<std::size_t>(j)]);
    walk(memo, dv, n, x, stack, L, leaf);
    x.pop_back();
  }
}

// Prefixes x of length j with their states, in lexicographic order.
void seed_prefix(const Memo& memo, int dv, std::vector<Letter>& x, std::vector<Node>& stack) {
  for (int j = 0; j < static_cast<int>(x.size()); ++j) {
    std::vector<Letter> p(x.begin(), x.begin() + j + 1);
    if (j + 1 == dv + 1)
      stack[static_cast<std::size_t>(j)] = memo.base(p);
    else if (j + 1 > dv + 1)
      memo.child(stack[static_cast<std::size_t>(j - 1)], p.back(), stack[static_cast<std::size_t>(j)]);
  }
}

void check_haagerup(int n, double s, double bound0) {
  const double bound = (n + 1.0) * (n + 1.0) * bound0;
  ++g_haagerup_checks;
  if (s > bound * (1 + 1e-9) + 1e-12)
    throw HaagerupViolation("s_" + std::to_string(n) + " = " + std::to_string(s) +
                            " exceeds (n+1)^2|v|^2|w|^2 = " + std::to_string(bound));
}

struct Setup {
  std::vector<EdgeTerm> vt, wt;
  CoefficientSeries out;
  double dim2 = 0;
  int depth = 0;
  double bound0 = 0;
};

Setup setup(const NormalizedSystem& ns, const MultiplicativeFunction& v, const MultiplicativeFunction& w,
            int nmax) {
  if (nmax < 0) throw std::invalid_argument("sphere_sums: nmax < 0");
  Setup st;
  st.vt = v.terms();
  st.wt = w.terms();
  st.out.nmax_requested = nmax;
  st.out.v_norm = norm(ns, v);
  st.out.w_norm = norm(ns, w);
  for (int d : ns.system.dims) st.dim2 += static_cast<double>(d) * d;
  st.dim2 /= ns.letters();
  st.depth = std::max(v.depth, w.depth);
  st.bound0 = st.out.v_norm * st.out.v_norm * st.out.w_norm * st.out.w_norm;
  return st;
}

}  // namespace

double series_work(int letters, int n, std::size_t v_terms, std::size_t w_terms, int depth, double dim2) {
  return static_cast<double>(sphere_size(letters, n)) * static_cast<double>(v_terms * w_terms) *
         (n + depth + 2) * dim2;
}

std::uint64_t haagerup_checks() { return g_haagerup_checks.load(); }

CoefficientSeries sphere_sums(const NormalizedSystem& ns, const MultiplicativeFunction& v,
                              const MultiplicativeFunction& w, int nmax, const SeriesOptions& opt) {
  Setup st = setup(ns, v, w, nmax);
  CoefficientSeries& out = st.out;
  const int L = ns.letters();
  const Memo memo(ns, v, st.vt, st.wt);
  const int dv = v.depth;

  for (int n = 0; n <= nmax; ++n) {
    const double cost = series_work(L, n, st.vt.size(), st.wt.size(), st.depth, st.dim2);
    if (out.work + cost > opt.budget) {
      out.complete = false;
      break;
    }
    out.work += cost;
    double s = 0;
    if (n < memo.min_radius()) {
      // near the origin the translated edges can still overlap the support of v
      Sum tot;
      if (n == 0)
        tot.add(direct_term(ns, st.vt, st.wt, {}));
      else
        for_each_in_sphere(L, n, [&](const std::vector<Letter>& x) { tot.add(direct_term(ns, st.vt, st.wt, x)); });
      s = tot.value();
    } else {
      // one task per two-letter prefix (one letter when n = 1), reduced in order
      const int plen = std::min(n, 2);
      std::vector<std::vector<Letter>> prefixes;
      for_each_in_sphere(L, plen, [&](const std::vector<Letter>& p) { prefixes.push_back(p); });
      std::vector<double> part(prefixes.size(), 0.0);
      const int np = static_cast<int>(prefixes.size());
      auto task = [&](int t) {
        std::vector<Letter> x = prefixes[static_cast<std::size_t>(t)];
        std::vector<Node> stack(static_cast<std::size_t>(n));
        seed_prefix(memo, dv, x, stack);
        Sum acc;
        auto leaf = [&](const std::vector<Letter>& xs, const std::vector<Node>& stk) {
          acc.add(std::norm(memo.coefficient(xs, stk)));
        };
        walk(memo, dv, n, x, stack, L, leaf);
        part[static_cast<std::size_t>(t)] = acc.value();
      };
      if (opt.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < np; ++t) task(t);
      } else {
        for (int t = 0; t < np; ++t) task(t);
      }
      Sum tot;
      for (double p : part) tot.add(p);
      s = tot.value();
    }
    check_haagerup(n, s, st.bound0);
    out.s.push_back(s);
  }
  return out;
}

CoefficientSeries sphere_sums_direct(const NormalizedSystem& ns, const MultiplicativeFunction& v,
                                     const MultiplicativeFunction& w, int nmax) {
  Setup st = setup(ns, v, w, nmax);
  for (int n = 0; n <= nmax; ++n) {
    Sum tot;
    if (n == 0)
      tot.add(direct_term(ns, st.vt, st.wt, {}));
    else
      for_each_in_sphere(ns.letters(), n,
                         [&](const std::vector<Letter>& x) { tot.add(direct_term(ns, st.vt, st.wt, x)); });
    const double s = tot.value();
    check_haagerup(n, s, st.bound0);
    st.out.s.push_back(s);
  }
  return st.out;
}

CoefficientSeries sphere_sums_moments(const NormalizedSystem& ns, const MultiplicativeFunction& v,
                                      const MultiplicativeFunction& w, int nmax) {
  Setup st = setup(ns, v, w, nmax);
  for (const auto& t : st.wt)
    if (!t.tail.empty()) throw std::invalid_argument("sphere_sums_moments: w must be supported on edges at e");
  const int L = ns.letters();
  const auto& sys = ns.system;
  const Memo memo(ns, v, st.vt, st.wt);
  const int n0 = v.depth + 1;

  // z = (conj(mu), rho^T) moves linearly along the walk: z_{xc} = A(c, p) z_x
  // with p the last letter of x, and the coefficient is l_p^T z_x.
  auto zdim = [&](Letter p) { return sys.dim(p) + sys.dim(inverse(p)); };
  auto state = [&](const Node& nd) {
    Vec z(zdim(nd.last));
    z << nd.mu.conjugate(), nd.rho.transpose();
    return z;
  };
  std::vector<Mat> A(static_cast<std::size_t>(L * L));
  for (Letter p = 0; p < L; ++p)
    for (Letter c = 0; c < L; ++c) {
      if (c == inverse(p)) continue;
      const Letter pb = inverse(p), cb = inverse(c);
      Mat m = Mat::Zero(zdim(c), zdim(p));
      m.topLeftCorner(sys.dim(c), sys.dim(p)) = sys.h(c, p).conjugate();
      Mat low = Mat::Zero(sys.dim(cb), sys.dim(p));
      for (Letter d = 0; d < L; ++d)
        if (d != c && d != pb) low += sys.h(d, cb).transpose() * ns.B(d).transpose() * sys.h(d, p).conjugate();
      m.bottomLeftCorner(sys.dim(cb), sys.dim(p)) = low;
      m.bottomRightCorner(sys.dim(cb), sys.dim(pb)) = sys.h(pb, cb).transpose();
      A[static_cast<std::size_t>(c * L + p)] = std::move(m);
    }
  std::vector<Vec> ell(static_cast<std::size_t>(L));
  for (Letter p = 0; p < L; ++p) {
    Vec l = Vec::Zero(zdim(p));
    for (const auto& t : st.wt) {
      if (t.letter == inverse(p))
        l.tail(sys.dim(inverse(p))) += t.value;
      else
        l.head(sys.dim(p)) += sys.h(t.letter, p).adjoint() * ns.B(t.letter) * t.value;
    }
    ell[static_cast<std::size_t>(p)] = std::move(l);
  }

  std::vector<Mat> Z(static_cast<std::size_t>(L));
  for (Letter p = 0; p < L; ++p) Z[static_cast<std::size_t>(p)] = Mat::Zero(zdim(p), zdim(p));
  for (int n = 0; n <= nmax; ++n) {
    Sum tot;
    if (n < n0) {
      if (n == 0)
        tot.add(direct_term(ns, st.vt, st.wt, {}));
      else
        for_each_in_sphere(L, n, [&](const std::vector<Letter>& x) { tot.add(direct_term(ns, st.vt, st.wt, x)); });
    } else {
      if (n == n0) {
        for_each_in_sphere(L, n0, [&](const std::vector<Letter>& x) {
          const Vec z = state(memo.base(x));
          Z[static_cast<std::size_t>(x.back())] += z * z.adjoint();
        });
      } else {
        std::vector<Mat> next(static_cast<std::size_t>(L));
        for (Letter c = 0; c < L; ++c) {
          Mat acc = Mat::Zero(zdim(c), zdim(c));
          for (Letter p = 0; p < L; ++p)
            if (c != inverse(p)) {
              const Mat& a = A[static_cast<std::size_t>(c * L + p)];
              acc += a * Z[static_cast<std::size_t>(p)] * a.adjoint();
            }
          next[static_cast<std::size_t>(c)] = std::move(acc);
        }
        Z = std::move(next);
      }
      for (Letter p = 0; p < L; ++p) {
        const Vec& l = ell[static_cast<std::size_t>(p)];
        tot.add((l.transpose() * Z[static_cast<std::size_t>(p)] * l.conjugate())(0).real());
      }
    }
    const double s = tot.value();
    check_haagerup(n, s, st.bound0);
    st.out.s.push_back(s);
  }
  return st.out;
}

namespace {

// Least-squares slope and R^2 of y against x.
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return {slope, r2};
}

}  // namespace

ExponentFit exponent_fit(const std::vector<double>& s, int burn_in) {
  const int nmax = static_cast<int>(s.size()) - 1;
  if (burn_in < 1) throw std::invalid_argument("exponent_fit: burn-in must be at least 1");
  if (nmax - burn_in + 1 < 6) throw std::invalid_argument("exponent_fit: series too short");
  if (std::none_of(s.begin(), s.end(), [](double x) { return x > 0; }))
    throw std::invalid_argument("exponent_fit: all-zero series");
  ExponentFit f;

  // plain log-log slope over the whole window, kept for reference
  {
    std::vector<double> x, y;
    for (int n = burn_in; n <= nmax; ++n)
      if (s[static_cast<std::size_t>(n)] > 0) {
        x.push_back(std::log(n));
        y.push_back(std::log(s[static_cast<std::size_t>(n)]));
      }
    f.raw_p = x.size() >= 2 ? 1.0 + line_fit(x, y).first : 1.0;
  }

  // Central differences over the upper half of the window. Constant and
  // linear terms of s_n, which dominate the plain slope for a long time,
  // drop out; s_n ~ n^{p-1} gives differences ~ n^{p-2}.
  f.window_lo = std::max(burn_in, (nmax + 1) / 2);
  f.window_hi = nmax - 1;
  std::vector<double> x, y, d;
  for (int n = f.window_lo; n <= f.window_hi; ++n) {
    const double c = 0.5 * (s[static_cast<std::size_t>(n) + 1] - s[static_cast<std::size_t>(n) - 1]);
    d.push_back(c);
    x.push_back(std::log(n));
  }
  if (std::any_of(d.begin(), d.end(), [](double c) { return c <= 0; })) {
    // not increasing along the tail: bounded
    f.p = 1;
    f.method = "central-difference (non-increasing tail)";
    double sum = 0, abs = 0;
    for (double c : d) {
      sum += c;
      abs += std::abs(c);
    }
    f.confidence = abs > 0 ? std::clamp(1.0 - sum / abs, 0.0, 1.0) : 1.0;
    return f;
  }
  // Local exponent n D_n / s_n tends to p - 1. Far below 1 the increments
  // are dying out faster than any power (a slow geometric approach to a
  // limit, which the log-log slope would misread as a power law).
  const double s_hi = s[static_cast<std::size_t>(f.window_hi)];
  const double local = s_hi > 0 ? f.window_hi * d.back() / s_hi : 0.0;
  if (local < 0.5) {
    f.p = 1;
    f.method = "central-difference (local exponent below 1/2)";
    f.confidence = std::clamp(1.0 - 2.0 * local, 0.0, 1.0);
    return f;
  }
  for (double c : d) y.push_back(std::log(c));
  const auto [q, r2] = line_fit(x, y);
  f.p = std::clamp(2.0 + q, 1.0, 3.0);
  f.method = "central-difference log-log";
  f.confidence = std::clamp(r2, 0.0, 1.0);
  return f;
}

namespace {

DegreeFit degree_at(const std::vector<double>& s, int N) {
  DegreeFit f;
  f.N = N;
  const double sN = s[static_cast<std::size_t>(N)];
  double d[4];  // backward differences at N
  for (int i = 0; i < 4; ++i) d[i] = s[static_cast<std::size_t>(N - i)];
  double scale = 1;
  for (int q = 1; q <= 3; ++q) {
    for (int i = 0; i < 4 - q; ++i) d[i] -= d[i + 1];
    scale *= N;
    f.r[q - 1] = std::abs(d[0]) * scale / sN;
    // roundoff in s grows about linearly in N; the q-th difference adds 2^q
    f.floor[q - 1] = std::max(1e-4, 1e4 * std::ldexp(DBL_EPSILON, q) * scale);
  }
  int deg = 0;
  for (int q = 1; q <= 2; ++q)
    if (f.r[q - 1] > f.floor[q - 1]) deg = q;
  f.p = 1.0 + deg;
  f.effective_p = 1.0 + N * (sN - s[static_cast<std::size_t>(N - 1)]) / sN;
  return f;
}

}  // namespace

DegreeFit degree_fit(const std::vector<double>& s) {
  const int N = static_cast<int>(s.size()) - 1;
  if (N < 63) throw std::invalid_argument("degree_fit: series too short");
  if (!(s.back() > 0) || !(s[static_cast<std::size_t>(N / 2)] > 0))
    throw std::invalid_argument("degree_fit: vanishing series");
  DegreeFit f = degree_at(s, N);
  f.settled = degree_at(s, N / 2).p == f.p;
  return f;
}

int long_series_length(double gap) {
  // transients decay at least like (1 - gap)^n; 40/gap puts them near e^-40
  const double want = gap > 0 ? 40.0 / gap : 1e9;
  return static_cast<int>(std::clamp(std::ceil(want), 1000.0, 20000.0));
}

PhiEps phi_eps(const CoefficientSeries& series, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("phi_eps: eps must be positive");
  PhiEps r;
  const double c = series.v_norm * series.v_norm * series.w_norm * series.w_norm;
  const double q = std::exp(-eps);
  // tail Σ_{n>N} (n+1)^2 q^n, summed until the terms are negligible
  auto tail = [&](int N) {
    double t = 0;
    for (int n = N + 1;; ++n) {
      const double term = (n + 1.0) * (n + 1.0) * std::pow(q, n);
      t += term;
      if (n > 2 * N + 10 && term < 1e-18 * t) break;
      if (n > N + 200000) break;
    }
    return c * t;
  };
  const int avail = static_cast<int>(series.s.size()) - 1;
  double sum = 0;
  for (int n = 0; n <= avail; ++n) {
    sum += series.s[static_cast<std::size_t>(n)] * std::pow(q, n);
    r.truncation = n;
    r.value = sum;
    r.tail_bound = tail(n);
    if (r.tail_bound < 1e-6 * sum) {
      r.bound_met = true;
      break;
    }
  }
  return r;
}

GoodVectorProbe good_vector_probe(const std::vector<double>& s) {
  GoodVectorProbe g;
  if (s.empty()) return g;
  g.sup = *std::max_element(s.begin(), s.end());
  const std::size_t n = s.size();
  // even windows, so that period-two oscillation averages out
  std::size_t t = n / 3;
  if (t >= 2) t &= ~std::size_t{1};
  t = std::max<std::size_t>(1, t);
  auto mean = [&](std::size_t lo, std::size_t hi) {
    return std::accumulate(s.begin() + static_cast<long>(lo), s.begin() + static_cast<long>(hi), 0.0) /
           static_cast<double>(hi - lo);
  };
  const double last = mean(n - t, n);
  const double mid = mean(n - 2 * t, n - t);
  g.last_third_ratio = mid > 0 ? last / mid : (last > 0 ? INFINITY : 1.0);
  g.bounded = g.last_third_ratio < 1.15;
  g.label = g.bounded ? "GVB-plausible" : "GVB-implausible";
  return g;
}

}  // namespace freerep
