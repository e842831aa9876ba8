#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "freerep/coefficients.hpp"
#include "freerep/parallel.hpp"

namespace freerep {

// Thrown when s_n > (n+1)^2 |v|^2 |w|^2 beyond roundoff. Never caught by
// the library: a violation means a bug upstream.
class HaagerupViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct CoefficientSeries {
  std::vector<double> s;  // s_0 .. s_n for the completed levels
  double v_norm = 0;
  double w_norm = 0;
  int nmax_requested = 0;
  bool complete = true;   // false when the work budget cut the series short
  double work = 0;        // estimated kernel work actually spent
};

struct SeriesOptions {
  double budget = 4e9;    // estimated kernel work units; see series_work()
  Exec exec = Exec::parallel;
};

// Cost model for one level: sphere size x term pairs x path length x dim^2.
double series_work(int letters, int n, std::size_t v_terms, std::size_t w_terms, int depth, double dim2);

// s_n = Σ_{|x|=n} |⟨v, π(x) w⟩|^2 by enumeration of the sphere. Values of v
// and the pairing with inward edges are extended one letter at a time along
// the depth-first walk.
CoefficientSeries sphere_sums(const NormalizedSystem& ns, const MultiplicativeFunction& v,
                              const MultiplicativeFunction& w, int nmax, const SeriesOptions& opt = {});

// Same sums from the closed-form edge kernel at every x, without the path
// memo and without a budget; the cross-check for sphere_sums.
CoefficientSeries sphere_sums_direct(const NormalizedSystem& ns, const MultiplicativeFunction& v,
                                     const MultiplicativeFunction& w, int nmax);

// Same sums regrouped by second moments: the walk state z_x of sphere_sums
// moves by a fixed linear map per letter pair, so Σ_{|x|=n} z_x z_x^* over
// words ending in a given letter obeys a linear recursion. Exact, and
// polynomial in n. w must be supported on edges at e (tail-free terms).
CoefficientSeries sphere_sums_moments(const NormalizedSystem& ns, const MultiplicativeFunction& v,
                                      const MultiplicativeFunction& w, int nmax);

// Number of Haagerup checks performed in this process (all passed).
std::uint64_t haagerup_checks();

struct ExponentFit {
  double p = 1;            // estimate in [1, 3]
  double raw_p = 1;        // 1 + plain log-log slope over [n0, nmax], not clamped
  double confidence = 0;   // in [0, 1]
  int window_lo = 0;
  int window_hi = 0;
  std::string method;
};

// See the README for the estimator; throws on short or all-zero series.
ExponentFit exponent_fit(const std::vector<double>& s, int burn_in = 3);

// Degree read off an exact long series. Past the spectral transients s_n is
// a polynomial in n, of degree at most 2 by the Haagerup bound, so
// r_q = |Δ^q s_N| N^q / s_N stays of order one for q <= deg and drops to
// roundoff above it. p = 1 + the largest q in {1, 2} with r_q above the
// noise floor.
struct DegreeFit {
  int N = 0;
  double p = 1;
  double r[3] = {0, 0, 0};        // q = 1, 2, 3
  double floor[3] = {0, 0, 0};    // threshold used for each q
  double effective_p = 1;         // 1 + N (s_N - s_{N-1}) / s_N
  bool settled = false;           // same p at N/2
};

// Throws on series shorter than 64 terms or with s_N <= 0.
DegreeFit degree_fit(const std::vector<double>& s);

// Length used for the long series given the spectral gap of D.
int long_series_length(double gap);

struct PhiEps {
  double value = 0;        // Σ_{n<=N} s_n e^{-εn}
  double tail_bound = 0;   // Haagerup bound on the omitted part
  int truncation = 0;      // N(ε)
  bool bound_met = false;  // tail_bound < 1e-6 · value with N(ε) <= available terms
};

PhiEps phi_eps(const CoefficientSeries& series, double eps);

struct GoodVectorProbe {
  double sup = 0;
  bool bounded = false;
  std::string label;  // "GVB-plausible" / "GVB-implausible"
  double last_third_ratio = 0;
};

// Heuristic on a finite horizon: the ratio of the mean over the last third
// to the mean over the middle third stays close to one for bounded series.
GoodVectorProbe good_vector_probe(const std::vector<double>& s);

}  // namespace freerep
