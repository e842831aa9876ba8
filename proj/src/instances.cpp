#include "freerep/instances.hpp"

#include <cmath>

namespace freerep {

namespace {

Mat gaussian(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = cplx(re, im);
    }
  return m;
}

void check_dims(int k, const std::vector<int>& dims) {
  if (k < 2) throw std::invalid_argument("need k >= 2");
  if (static_cast<int>(dims.size()) != 2 * k) throw std::invalid_argument("dims must list 2k entries");
}

}  // namespace

MatrixSystem endpoint_system(int k, bool normalized) {
  auto sys = MatrixSystem::zero(Alphabet::standard(k), std::vector<int>(static_cast<std::size_t>(2 * k), 1));
  const double v = normalized ? 1.0 / std::sqrt(2.0 * k - 1.0) : 1.0;
  for (Letter b = 0; b < 2 * k; ++b)
    for (Letter a = 0; a < 2 * k; ++a)
      if (b != inverse(a)) sys.h(b, a)(0, 0) = v;
  return sys;
}

MatrixSystem random_system(int k, const std::vector<int>& dims, std::mt19937_64& rng) {
  check_dims(k, dims);
  auto sys = MatrixSystem::zero(Alphabet::standard(k), dims);
  for (Letter a = 0; a < 2 * k; ++a)
    for (Letter b = 0; b < 2 * k; ++b)
      if (b != inverse(a)) sys.h(b, a) = gaussian(sys.dim(b), sys.dim(a), rng);
  return sys;
}

MatrixSystem random_twin_symmetric(int k, const std::vector<int>& dims, std::mt19937_64& rng) {
  check_dims(k, dims);
  for (Letter a = 0; a < 2 * k; a += 2)
    if (dims[static_cast<std::size_t>(a)] != dims[static_cast<std::size_t>(a) + 1])
      throw std::invalid_argument("twin-symmetric systems need n_a = n_{a^-1}");
  auto sys = MatrixSystem::zero(Alphabet::standard(k), dims);
  const int L = 2 * k;
  std::vector<char> done(static_cast<std::size_t>(L * L), 0);
  for (Letter a = 0; a < L; ++a)
    for (Letter b = 0; b < L; ++b) {
      if (b == inverse(a) || done[static_cast<std::size_t>(a * L + b)]) continue;
      // H_ab and its partner H_{b^-1 a^-1}
      sys.h(a, b) = gaussian(sys.dim(a), sys.dim(b), rng);
      sys.h(inverse(b), inverse(a)) = sys.h(a, b).adjoint();
      done[static_cast<std::size_t>(a * L + b)] = 1;
      done[static_cast<std::size_t>(inverse(b) * L + inverse(a))] = 1;
    }
  return sys;
}

namespace {

// Unknowns of the joint search, packed as real vectors.
struct Packing {
  int L = 0;
  std::vector<int> dims;
  bool sym = false;
  std::vector<std::pair<Letter, Letter>> free_pairs;  // (b, a) entries of H that are parameters
  int n_params = 0;

  Packing(int k, std::vector<int> d, bool twin_symmetric) : L(2 * k), dims(std::move(d)), sym(twin_symmetric) {
    std::vector<char> seen(static_cast<std::size_t>(L * L), 0);
    for (Letter a = 0; a < L; ++a)
      for (Letter b = 0; b < L; ++b) {
        if (b == inverse(a) || seen[static_cast<std::size_t>(b * L + a)]) continue;
        free_pairs.emplace_back(b, a);
        seen[static_cast<std::size_t>(b * L + a)] = 1;
        if (sym) seen[static_cast<std::size_t>(inverse(a) * L + inverse(b))] = 1;
        n_params += 2 * dims[static_cast<std::size_t>(b)] * dims[static_cast<std::size_t>(a)];
      }
    for (Letter a = 0; a < L; a += 2)
      n_params += 2 * dims[static_cast<std::size_t>(inverse(a))] * dims[static_cast<std::size_t>(a)];
  }

  void unpack(const RVec& x, MatrixSystem& sys, std::vector<Mat>& Q) const {
    Eigen::Index i = 0;
    auto take = [&](int r, int c) {
      Mat m(r, c);
      for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index q = 0; q < r; ++q) {
          m(q, j) = cplx(x(i), x(i + 1));
          i += 2;
        }
      return m;
    };
    for (auto [b, a] : free_pairs) {
      sys.h(b, a) = take(sys.dim(b), sys.dim(a));
      if (sym) sys.h(inverse(a), inverse(b)) = sys.h(b, a).adjoint();
    }
    Q.assign(static_cast<std::size_t>(L), Mat());
    for (Letter a = 0; a < L; a += 2) {
      Q[static_cast<std::size_t>(a)] = take(sys.dim(inverse(a)), sys.dim(a));
      Q[static_cast<std::size_t>(inverse(a))] = -Q[static_cast<std::size_t>(a)].adjoint();
    }
  }
};

// Perron data by direct eigensolve; cheap for the small systems searched.
bool perron(MatrixSystem& sys, std::vector<Mat>& B) {
  Mat T = transfer_matrix(sys);
  Eigen::ComplexEigenSolver<Mat> es(T, true);
  if (es.info() != Eigen::Success) return false;
  Eigen::Index best = 0;
  es.eigenvalues().cwiseAbs().maxCoeff(&best);
  const double rho = std::abs(es.eigenvalues()(best));
  if (!(rho > 0) || !std::isfinite(rho)) return false;
  for (auto& m : sys.H) m /= std::sqrt(rho);
  Vec v = es.eigenvectors().col(best);
  auto off = block_offsets(sys.dims, sys.dims);
  cplx tr = 0;
  B.resize(static_cast<std::size_t>(sys.letters()));
  for (Letter a = 0; a < sys.letters(); ++a) {
    const auto ua = static_cast<std::size_t>(a);
    B[ua] = unvec(v.segment(off[ua], off[ua + 1] - off[ua]), sys.dim(a), sys.dim(a));
    tr += B[ua].trace();
  }
  double total = 0;
  for (int n : sys.dims) total += n;
  for (auto& b : B) {
    b *= total / tr;
    b = (0.5 * (b + b.adjoint())).eval();
  }
  return true;
}

struct Objective {
  const Packing& p;
  Alphabet alpha;
  double e_norm = 1.0;  // |E| at the last evaluation

  RVec operator()(const RVec& x) {
    MatrixSystem sys = MatrixSystem::zero(alpha, p.dims);
    std::vector<Mat> Q;
    p.unpack(x, sys, Q);
    std::vector<Mat> B;
    const int L = p.L;
    Eigen::Index m = 0;
    for (Letter a = 0; a < L; ++a)
      for (Letter b = 0; b < L; ++b)
        if (a != inverse(b)) m += 2 * static_cast<Eigen::Index>(p.dims[static_cast<std::size_t>(inverse(a))]) * p.dims[static_cast<std::size_t>(b)];
    RVec r = RVec::Constant(m, 1e3);
    if (!perron(sys, B)) return r;
    NormalizedSystem ns;
    ns.system = sys;
    ns.forms.B = B;
    MatrixSystem tw = twin_system(sys);
    auto E = e_maps(ns, tw);
    Eigen::Index i = 0;
    double en = 0;
    for (Letter a = 0; a < L; ++a)
      for (Letter b = 0; b < L; ++b) {
        if (a == inverse(b)) continue;
        const Mat& e = E[static_cast<std::size_t>(a * L + b)];
        en = std::max(en, e.norm());
        Mat d = tw.h(a, b) * Q[static_cast<std::size_t>(b)] + e - Q[static_cast<std::size_t>(a)] * sys.h(a, b);
        for (Eigen::Index q = 0; q < d.size(); ++q) {
          r(i++) = d(q).real();
          r(i++) = d(q).imag();
        }
      }
    e_norm = en;
    return r;
  }
};

}  // namespace

SearchResult search_q_solvable(int k, const std::vector<int>& dims, bool twin_symmetric,
                               std::mt19937_64& rng, const SearchOptions& opt) {
  check_dims(k, dims);
  if (twin_symmetric)
    for (std::size_t a = 0; a < dims.size(); a += 2)
      if (dims[a] != dims[a + 1]) throw std::invalid_argument("twin-symmetric search needs n_a = n_{a^-1}");
  Packing pk(k, dims, twin_symmetric);
  Objective f{pk, Alphabet::standard(k)};
  std::normal_distribution<double> nd(0.0, 1.0);
  RVec x(pk.n_params);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(rng);

  RVec r = f(x);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  SearchResult out;
  double checkpoint = cost;
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it + 1;
    if (std::sqrt(cost) <= opt.target * f.e_norm) break;
    if (it > 0 && it % 25 == 0) {
      // stalled in a local minimum: less than 10% progress in 25 steps
      if (cost > 0.9 * checkpoint) break;
      checkpoint = cost;
    }
    // central-difference Jacobian
    RMat J(r.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
      RVec xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      J.col(j) = (f(xp) - f(xm)) / (2 * h);
    }
    const RVec g = J.transpose() * r;
    const RMat A = J.transpose() * J;
    bool accepted = false;
    while (lambda < 1e12) {
      RMat Ad = A;
      Ad.diagonal().array() += lambda;
      RVec step = Ad.ldlt().solve(-g);
      RVec xn = x + step;
      RVec rn = f(xn);
      const double cn = rn.squaredNorm();
      if (std::isfinite(cn) && cn < cost) {
        x = std::move(xn);
        r = std::move(rn);
        cost = cn;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
  }
  r = f(x);  // refresh e_norm at the final point
  out.residual = r.norm() / std::max(1e-300, f.e_norm);
  out.converged = out.residual <= opt.target * 10;
  out.system = MatrixSystem::zero(Alphabet::standard(k), dims);
  std::vector<Mat> Q;
  pk.unpack(x, out.system, Q);
  return out;
}

std::optional<GeneratedInstance> generate_class_one(ClassLabel want, int k, const std::vector<int>& dims,
                                                    std::uint64_t seed, int max_attempts,
                                                    const Tolerances& tol) {
  if (want != ClassLabel::AI && want != ClassLabel::BI)
    throw std::invalid_argument("generate_class_one: only AI and BI are searched for");
  const bool sym = want == ClassLabel::BI;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
    std::mt19937_64 rng(s);
    SearchResult sr = search_q_solvable(k, dims, sym, rng);
    if (!sr.converged) continue;
    try {
      GeneratedInstance gi;
      gi.nsys = normalize(sr.system, tol);
      if (!gi.nsys.irreducible) continue;
      gi.report = classify(gi.nsys, tol);
      if (gi.report.class_label != want || gi.report.verdict == Verdict::undecided) continue;
      gi.seed = s;
      gi.attempts = attempt + 1;
      return gi;
    } catch (const NumericalError&) {
      continue;  // reducible or degenerate optimum, try the next seed
    }
  }
  return std::nullopt;
}

}  // namespace freerep
