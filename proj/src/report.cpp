#include "freerep/report.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "freerep/intertwiner.hpp"
#include "freerep/twin.hpp"

namespace freerep {

using ojson = nlohmann::ordered_json;

namespace {

ojson cplx_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

struct ResidualTable {
  ojson table = ojson::object();
  std::vector<std::string> failed;

  void add(const std::string& name, double value, double tolerance) {
    const bool ok = std::isfinite(value) && value <= tolerance;
    table[name] = {{"value", value}, {"tolerance", tolerance}, {"ok", ok}};
    if (!ok) failed.push_back(name);
  }
  void absent(const std::string& name) { table[name] = nullptr; }
};

ojson tolerances_json(const Tolerances& t) {
  return {{"fix", t.fix}, {"pd", t.pd}, {"null_rel", t.null_rel},
          {"delta", t.delta}, {"inv", t.inv}, {"identity", t.identity}};
}

ojson split_json(const SplitReport& s) {
  return {{"c", s.c},
          {"lambda_plus", cplx_json(s.lambda_plus)},
          {"lambda_minus", cplx_json(s.lambda_minus)},
          {"dim_plus", s.dim_plus},
          {"dim_minus", s.dim_minus},
          {"unimodularity", s.unimodularity},
          {"idempotency", s.idempotency},
          {"orthogonality", s.orthogonality},
          {"completeness", s.completeness},
          {"commutation", s.commutation},
          {"operator_involution", s.operator_involution},
          {"ok", s.ok}};
}

}  // namespace

EdgeTerm parse_edge(const MatrixSystem& sys, std::string_view text) {
  const auto& alpha = sys.alphabet;
  const auto bar = text.find('|');
  if (bar == std::string_view::npos) throw std::invalid_argument("edge must look like \"x|a\"");
  std::string_view rest = text.substr(bar + 1);
  std::string_view letter = rest;
  int index = 0;
  if (auto bar2 = rest.find('|'); bar2 != std::string_view::npos) {
    letter = rest.substr(0, bar2);
    const std::string idx(rest.substr(bar2 + 1));
    std::size_t used = 0;
    try {
      index = std::stoi(idx, &used);
    } catch (...) {
      used = 0;
    }
    if (used != idx.size() || idx.empty()) throw std::invalid_argument("bad basis index \"" + idx + "\"");
  }
  EdgeTerm t;
  t.tail = parse_word(alpha, text.substr(0, bar));
  auto a = alpha.find(letter);
  if (!a) throw std::invalid_argument("unknown letter \"" + std::string(letter) + "\"");
  if (!t.tail.empty() && t.tail.back() == inverse(*a))
    throw std::invalid_argument("edge x|a needs x·a reduced with |x·a| = |x| + 1");
  t.letter = *a;
  if (index < 0 || index >= sys.dim(*a)) throw std::invalid_argument("basis index out of range");
  t.value = Vec::Zero(sys.dim(*a));
  t.value(index) = 1.0;
  return t;
}

std::string series_csv(const CoefficientSeries& s) {
  std::string out = "n,s_n\n";
  char buf[64];
  for (std::size_t n = 0; n < s.s.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", n, s.s[n]);
    out += buf;
  }
  return out;
}

ojson series_json(const CoefficientSeries& s, const std::string& vector) {
  ojson rows = ojson::array();
  for (std::size_t n = 0; n < s.s.size(); ++n) rows.push_back({{"n", n}, {"s_n", s.s[n]}});
  return {{"vector", vector},
          {"v_norm", s.v_norm},
          {"nmax_requested", s.nmax_requested},
          {"complete", s.complete},
          {"series", std::move(rows)}};
}

std::string report_schema_path() { return std::string(FREEREP_SCHEMA_DIR) + "/report.schema.json"; }

PipelineRun run_pipeline(const SystemFile& input, const PipelineOptions& opt) {
  return run_pipeline(normalize(input.system, opt.tol), input.label, opt);
}

PipelineRun run_pipeline(const NormalizedSystem& ns, const std::string& label, const PipelineOptions& opt,
                         const ojson& extra) {
  PipelineRun run;
  const Tolerances& tol = opt.tol;
  SpectralReport rep = classify(ns, tol, opt.exec);
  std::vector<std::string> diagnostics = rep.diagnostics;
  std::vector<std::string> warnings;

  ResidualTable res;
  res.add("compatibility", compatibility_residual(ns.system, ns.forms), tol.fix);
  res.add("twin_compatibility", compatibility_residual(rep.pkg.twin.system, rep.pkg.twin.forms), tol.fix);
  if (rep.pkg.K)
    res.add("k_unitarity", rep.pkg.K->unitarity_residual, tol.identity);
  else
    res.absent("k_unitarity");

  ojson q_json = {{"solvable", rep.q.q.has_value()}, {"lsq_residual", rep.q.lsq_residual}};
  if (rep.q.q) {
    res.add("q_equation", rep.q.q->residual, tol.identity);
    res.add("qq_antisymmetry", rep.q.q->antisymmetry_residual, tol.identity);
  } else {
    res.absent("q_equation");
    res.absent("qq_antisymmetry");
  }

  ojson split_section = nullptr;
  ojson rank_section = nullptr;
  const bool class_one = rep.class_label == ClassLabel::AI || rep.class_label == ClassLabel::BI;
  if (class_one && rep.q.q) {
    try {
      Intertwiner J = build_J(rep);
      res.add("inverse_relations", verify_inverse_relations(J).max(), tol.identity);
      res.add("fin", fin_residual(J, opt.fin_nmax), 1e-10);
      WResiduals w = verify_isometry_and_intertwining(J, opt.w_depth, opt.exec);
      res.add("isometry", w.isometry, 1e-8);
      res.add("intertwining", w.intertwining, 1e-8);
      if (rep.class_label == ClassLabel::BI) {
        SplitReport sp = split(J, tol.identity);
        const double worst = std::max({sp.unimodularity, sp.idempotency, sp.orthogonality, sp.completeness});
        res.add("split", worst, tol.identity);
        if (sp.commutation > 1e-8) res.failed.push_back("split commutation");
        if (!sp.ok) diagnostics.push_back("split: " + sp.diagnostic);
        split_section = split_json(sp);
      } else {
        res.absent("split");
      }
      rank_section = ojson::array();
      bool rank_ok = true;
      for (Letter a = 0; a < ns.letters(); ++a)
        for (Letter b = 0; b < ns.letters(); ++b) {
          if (a == b) continue;
          RankProfile rp = finite_rank_check(J, a, b, opt.rank_nmin, opt.rank_nmax, opt.seed);
          rank_ok = rank_ok && rp.within_bound && rp.stabilizes;
          rank_section.push_back({{"a", ns.system.alphabet.name(a)},
                                  {"b", ns.system.alphabet.name(b)},
                                  {"depths", rp.depths},
                                  {"rank", rp.rank},
                                  {"hs_norm", rp.hs_norm},
                                  {"bound", rp.bound},
                                  {"within_bound", rp.within_bound},
                                  {"stabilizes", rp.stabilizes}});
        }
      if (!rank_ok) res.failed.push_back("finite_rank");
    } catch (const std::exception& e) {
      diagnostics.push_back(std::string("intertwiner: ") + e.what());
    }
  }
  for (const char* k : {"inverse_relations", "fin", "isometry", "intertwining", "split"})
    if (!res.table.contains(k)) res.absent(k);
  res.table["split_detail"] = split_section;
  res.table["finite_rank"] = rank_section;

  for (const auto& f : res.failed) diagnostics.push_back("residual above tolerance: " + f);
  // measured exponent
  ojson measured = nullptr;
  bool partial = false;
  try {
    EdgeTerm t = parse_edge(ns.system, opt.vector);
    MultiplicativeFunction v = canonicalize(ns.system, std::vector<EdgeTerm>{t}, native_depth(t));
    SeriesOptions so;
    so.budget = opt.budget;
    so.exec = opt.exec;
    run.series = sphere_sums(ns, v, v, opt.nmax, so);
    partial = !run.series.complete;
    // Exact long series by second moments; needs a vector on an edge at e.
    ojson long_json = nullptr;
    std::optional<bool> long_agrees;
    if (t.tail.empty()) {
      const int N = opt.long_n > 0 ? opt.long_n : long_series_length(rep.eig.gap);
      const CoefficientSeries ls = sphere_sums_moments(ns, v, v, N);
      const DegreeFit df = degree_fit(ls.s);
      long_agrees = std::abs(df.p - rep.predicted_exponent) <= 0.3;
      if (!df.settled) warnings.push_back("long-series degree differs between N/2 and N");
      long_json = {{"N", df.N},
                   {"p", df.p},
                   {"r", ojson::array({df.r[0], df.r[1], df.r[2]})},
                   {"floor", ojson::array({df.floor[0], df.floor[1], df.floor[2]})},
                   {"effective_p", df.effective_p},
                   {"settled", df.settled},
                   {"agrees_with_prediction", *long_agrees}};
    } else {
      warnings.push_back("long series skipped: the vector is not on an edge at e");
    }
    ojson fit_json = nullptr;
    try {
      ExponentFit fit = exponent_fit(run.series.s);
      const bool agrees = std::abs(fit.p - rep.predicted_exponent) <= 0.3;
      if (long_agrees ? !*long_agrees : !agrees)
        warnings.push_back("measured exponent differs from the class prediction by more than 0.3");
      else if (!agrees)
        warnings.push_back("short-range fit differs from the class prediction; the long series agrees");
      fit_json = {{"p", fit.p},
                  {"raw_p", fit.raw_p},
                  {"confidence", fit.confidence},
                  {"window", ojson::array({fit.window_lo, fit.window_hi})},
                  {"method", fit.method},
                  {"agrees_with_prediction", agrees}};
    } catch (const std::exception& e) {
      warnings.push_back(std::string("exponent fit: ") + e.what());
    }
    GoodVectorProbe gv = good_vector_probe(run.series.s);
    measured = {{"vector", opt.vector},
                {"nmax", opt.nmax},
                {"levels_completed", static_cast<int>(run.series.s.size()) - 1},
                {"complete", run.series.complete},
                {"s", run.series.s},
                {"fit", std::move(fit_json)},
                {"long_series", std::move(long_json)},
                {"good_vector", {{"label", gv.label}, {"sup", gv.sup}}}};
  } catch (const std::invalid_argument& e) {
    warnings.push_back(std::string("series skipped: ") + e.what());
  }
  if (partial) diagnostics.push_back("series budget exceeded; partial output");
  Verdict verdict = rep.verdict;
  if (!diagnostics.empty()) verdict = Verdict::undecided;

  ojson trace = nullptr;
  if (rep.trace)
    trace = {{"lemma_value", cplx_json(rep.trace->lemma_value)},
             {"twin_value", cplx_json(rep.trace->twin_value)},
             {"lemma_vanishes", rep.trace->lemma_vanishes},
             {"twin_vanishes", rep.trace->twin_vanishes}};

  ojson r;
  r["tool"] = {{"name", "freerep"}, {"version", kToolVersion}};
  r["label"] = label;
  if (!extra.is_null()) r["instance"] = extra;
  r["normalization"] = {{"convention", "rho(T) = 1, sum_a tr B_a = sum_a n_a"},
                        {"input_scale", ns.input_scale},
                        {"power_iterations", ns.power_iterations},
                        {"direct_solve", ns.used_direct_solve}};
  r["generators"] = ns.system.alphabet.generators();
  r["dims"] = ns.system.dims;
  r["rho_T"] = ns.rho_certificate;
  r["rho_D"] = rep.rho_D;
  r["mult_one"] = rep.eig.mult_one;
  r["dim_one"] = rep.eig.dim_one;
  r["gap"] = rep.eig.gap;
  r["twins_equivalent"] = rep.twins_equivalent;
  r["class"] = to_string(rep.class_label);
  r["candidate_labels"] = rep.candidate_labels;
  r["predicted_exponent"] = rep.predicted_exponent;
  r["verdict"] = to_string(verdict);
  r["trace_condition"] = std::move(trace);
  r["q"] = std::move(q_json);
  r["residuals"] = std::move(res.table);
  r["measured_exponent"] = std::move(measured);
  r["partial"] = partial;
  r["seed"] = opt.seed;
  r["tolerances"] = tolerances_json(tol);
  r["diagnostics"] = diagnostics;
  r["warnings"] = warnings;

  run.report = std::move(r);
  run.spectral = std::move(rep);
  run.exit_code = (verdict == Verdict::undecided || partial) ? 2 : 0;
  return run;
}

}  // namespace freerep
