// freerep: batch front end for matrix systems on free groups.
//
// Exit codes: 0 success, 1 validation failure (bad flags, bad files,
// reducible systems), 2 undecided verdict or exhausted work budget.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "freerep/instances.hpp"
#include "freerep/report.hpp"
#include "freerep/system_io.hpp"

namespace fs = std::filesystem;
using namespace freerep;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUndecided = 2;

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void print_file_error(const std::string& path, const SystemFileError& e) {
  std::cerr << path << ": error[" << e.code() << "]: " << e.what() << "\n";
}

struct Loaded {
  std::optional<SystemFile> file;
  int code = kOk;
};

// Parse and structurally validate; prints diagnostics.
Loaded load_checked(const std::string& path) {
  Loaded l;
  try {
    l.file = load_system(path);
  } catch (const SystemFileError& e) {
    print_file_error(path, e);
    l.code = kInvalid;
    return l;
  }
  auto diags = validate(l.file->system);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << path << ": error[" << d.code << "]: " << d.message << "\n";
    l.file.reset();
    l.code = kInvalid;
  }
  return l;
}

int cmd_validate(const std::vector<std::string>& paths) {
  int code = kOk;
  for (const auto& p : paths) {
    Loaded l = load_checked(p);
    if (!l.file) {
      code = kInvalid;
      continue;
    }
    if (l.file->forms) {
      const double r = compatibility_residual(l.file->system, *l.file->forms);
      // supplied forms are only advisory; a mismatch is reported, not fatal
      std::cout << p << ": supplied B compatibility residual " << r << "\n";
    }
    std::cout << p << ": ok\n";
  }
  return code;
}

int cmd_normalize(const std::string& path, const std::string& out, const Tolerances& tol) {
  Loaded l = load_checked(path);
  if (!l.file) return l.code;
  NormalizedSystem ns = normalize(l.file->system, tol);
  SystemFile f;
  f.system = ns.system;
  f.forms = ns.forms;
  f.label = l.file->label;
  write_out(out, dump_system(f));
  return kOk;
}

int run_one(const std::string& path, const std::string& out, const PipelineOptions& opt) {
  Loaded l = load_checked(path);
  if (!l.file) return l.code;
  try {
    PipelineRun run = run_pipeline(*l.file, opt);
    write_out(out, run.report.dump(2) + "\n");
    for (const auto& d : run.report["diagnostics"]) std::cerr << path << ": " << d.get<std::string>() << "\n";
    return run.exit_code;
  } catch (const ReducibleSystemError& e) {
    std::cerr << path << ": error[reducible]: " << e.what() << "\n";
    return kInvalid;
  } catch (const NumericalError& e) {
    std::cerr << path << ": undecided: " << e.what() << "\n";
    return kUndecided;
  }
}

int cmd_classify(const std::vector<std::string>& paths, const std::string& out, PipelineOptions opt) {
  if (paths.size() == 1) return run_one(paths.front(), out, opt);
  if (out.empty() || !fs::is_directory(out)) {
    std::cerr << "classify: with several inputs -o must name an existing directory\n";
    return kInvalid;
  }
  // one pipeline per file, files spread over the worker pool
  opt.exec = Exec::serial;
  std::vector<int> codes(paths.size(), kOk);
  const auto n = static_cast<long>(paths.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto& p = paths[static_cast<std::size_t>(i)];
    const auto target = (fs::path(out) / (fs::path(p).stem().string() + ".report.json")).string();
    try {
      codes[static_cast<std::size_t>(i)] = run_one(p, target, opt);
    } catch (const std::exception& e) {
      std::cerr << p << ": " << e.what() << "\n";
      codes[static_cast<std::size_t>(i)] = kInvalid;
    }
  }
  int worst = kOk;
  for (int c : codes)
    if (c == kInvalid || (c == kUndecided && worst == kOk)) worst = c;
  return worst;
}

int cmd_series(const std::string& path, const std::string& edge, int nmax, const std::string& out,
               const std::string& json_out, double budget, const Tolerances& tol) {
  Loaded l = load_checked(path);
  if (!l.file) return l.code;
  NormalizedSystem ns = normalize(l.file->system, tol);
  EdgeTerm t;
  try {
    t = parse_edge(ns.system, edge);
  } catch (const std::invalid_argument& e) {
    std::cerr << "series: --vector: " << e.what() << "\n";
    return kInvalid;
  }
  MultiplicativeFunction v = canonicalize(ns.system, std::vector<EdgeTerm>{t}, native_depth(t));
  SeriesOptions so;
  so.budget = budget;
  CoefficientSeries s = sphere_sums(ns, v, v, nmax, so);
  write_out(out, series_csv(s));
  if (!json_out.empty()) write_out(json_out, series_json(s, edge).dump(2) + "\n");
  if (!s.complete) {
    std::cerr << "series: work budget exceeded after n = " << static_cast<int>(s.s.size()) - 1
              << "; output is partial\n";
    return kUndecided;
  }
  return kOk;
}

std::vector<int> parse_dims(const std::string& text, int k) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(std::stoi(item));
  if (dims.size() == static_cast<std::size_t>(k)) {
    // one entry per generator: inverse letters get the same dimension
    std::vector<int> full;
    for (int d : dims) full.insert(full.end(), {d, d});
    dims = full;
  }
  if (dims.size() != static_cast<std::size_t>(2 * k)) throw std::invalid_argument("--dims needs k or 2k entries");
  for (int d : dims)
    if (d < 1 || d > 4) throw std::invalid_argument("--dims entries must lie in [1, 4]");
  return dims;
}

int cmd_demo(const std::string& name, int k, const std::string& dims_text, std::uint64_t seed, const std::string& out,
             const std::string& csv, PipelineOptions opt, bool nmax_set) {
  nlohmann::ordered_json instance;
  NormalizedSystem ns;
  std::string label;
  if (name == "endpoint-f2") {
    if (!nmax_set) opt.nmax = 12;
    ns = normalize(endpoint_system(2), opt.tol);
    label = "endpoint F2: all H_ba = 1/sqrt(3)";
    instance = {{"kind", name}, {"seed", seed}, {"k", 2}, {"dims", ns.system.dims}};
  } else {
    const ClassLabel want = name == "random-ai" ? ClassLabel::AI : ClassLabel::BI;
    auto g = generate_class_one(want, k, parse_dims(dims_text, k), seed, 20, opt.tol);
    if (!g) {
      std::cerr << "demo: no " << to_string(want) << " instance found from seed " << seed << "\n";
      return kUndecided;
    }
    ns = g->nsys;
    label = std::string("generated ") + to_string(want) + " instance";
    instance = {{"kind", name}, {"seed", g->seed}, {"attempts", g->attempts}, {"k", k}, {"dims", ns.system.dims}};
  }
  PipelineRun run = run_pipeline(ns, label, opt, instance);
  write_out(out, run.report.dump(2) + "\n");
  if (!csv.empty()) write_out(csv, series_csv(run.series));
  for (const auto& d : run.report["diagnostics"]) std::cerr << "demo: " << d.get<std::string>() << "\n";
  return run.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();

  CLI::App app{"freerep: matrix systems, twin classification and matrix-coefficient growth on free groups"};
  app.require_subcommand(1);

  PipelineOptions opt;
  double tol_identity = opt.tol.identity;
  std::string out;
  std::uint64_t seed = 1;
  double budget = opt.budget;

  auto add_tol = [&](CLI::App* sub) {
    sub->add_option("--tol", tol_identity, "tolerance for algebraic identities")->check(CLI::Range(1e-12, 1e-4));
  };

  auto* v = app.add_subcommand("validate", "check a system file");
  std::vector<std::string> v_paths;
  v->add_option("files", v_paths)->required()->check(CLI::ExistingFile);

  auto* n = app.add_subcommand("normalize", "write the normalized system with its Perron forms");
  std::string n_path;
  n->add_option("file", n_path)->required()->check(CLI::ExistingFile);
  n->add_option("-o,--out", out, "output file (default stdout)");

  auto* c = app.add_subcommand("classify", "classify and verify, emit a JSON report");
  std::vector<std::string> c_paths;
  c->add_option("files", c_paths)->required()->check(CLI::ExistingFile);
  c->add_option("-o,--out", out, "report file, or directory for several inputs");
  add_tol(c);
  c->add_option("--nmax", opt.nmax, "sphere radius for the exponent fit")->check(CLI::Range(6, 14));
  c->add_option("--seed", seed, "seed for randomized sketches");
  c->add_option("--vector", opt.vector, "edge \"x|a\" or \"x|a|i\" for the exponent fit");
  c->add_option("--wdepth", opt.w_depth, "depth of W_N for isometry checks")->check(CLI::Range(1, 4));
  c->add_option("--rank-nmax", opt.rank_nmax, "largest depth of the finite-rank profile")->check(CLI::Range(2, 6));
  c->add_option("--budget", budget, "series work budget")->check(CLI::PositiveNumber);
  c->add_option("--long-n", opt.long_n, "length of the moment series (0: from the gap)")->check(CLI::Range(0, 100000));

  auto* s = app.add_subcommand("series", "sphere sums s_n as CSV");
  std::string s_path, s_vector = "e|a", s_json;
  int s_nmax = 10;
  s->add_option("file", s_path)->required()->check(CLI::ExistingFile);
  s->add_option("--vector", s_vector, "edge \"x|a\" or \"x|a|i\"");
  s->add_option("--nmax", s_nmax)->check(CLI::Range(0, 14));
  s->add_option("-o,--out", out, "CSV file (default stdout)");
  s->add_option("--json", s_json, "JSON mirror of the CSV");
  s->add_option("--budget", budget)->check(CLI::PositiveNumber);

  auto* d = app.add_subcommand("demo", "bundled example runs");
  std::string d_name;
  int d_k = 2;
  std::string d_dims = "1,1";
  std::string d_csv;
  d->add_option("name", d_name)->required()->check(CLI::IsMember({"endpoint-f2", "random-ai", "random-bi"}));
  d->add_option("--seed", seed, "instance search seed");
  d->add_option("--k", d_k, "rank of the free group")->check(CLI::Range(2, 3));
  d->add_option("--dims", d_dims, "dimensions per generator (k entries) or per letter (2k)");
  d->add_option("--nmax", opt.nmax)->check(CLI::Range(6, 14));
  d->add_option("-o,--out", out, "report file (default stdout)");
  d->add_option("--csv", d_csv, "also write the series");
  d->add_option("--long-n", opt.long_n, "length of the moment series (0: from the gap)")->check(CLI::Range(0, 100000));
  add_tol(d);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  opt.tol.identity = tol_identity;
  opt.seed = seed;
  opt.budget = budget;
  try {
    if (*v) return cmd_validate(v_paths);
    if (*n) return cmd_normalize(n_path, out, opt.tol);
    if (*c) return cmd_classify(c_paths, out, opt);
    if (*s) return cmd_series(s_path, s_vector, s_nmax, out, s_json, budget, opt.tol);
    if (*d) return cmd_demo(d_name, d_k, d_dims, seed, out, d_csv, opt, d->count("--nmax") > 0);
  } catch (const ReducibleSystemError& e) {
    std::cerr << "error[reducible]: " << e.what() << "\n";
    return kInvalid;
  } catch (const NumericalError& e) {
    std::cerr << "undecided: " << e.what() << "\n";
    return kUndecided;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
