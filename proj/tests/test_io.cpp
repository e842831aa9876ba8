#include <doctest.h>

#include "freerep/report.hpp"
#include "freerep/system_io.hpp"
#include "support.hpp"

using namespace freerep;

namespace {

std::string s0_text() {
  SystemFile f;
  f.system = endpoint_system(2);
  f.label = "S0";
  return dump_system(f);
}

int error_line(const std::string& text) {
  try {
    parse_system(text);
  } catch (const SystemFileError& e) {
    return e.line();
  }
  return -1;
}

std::string error_code(const std::string& text) {
  try {
    parse_system(text);
  } catch (const SystemFileError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("system file round trip is exact") {
  std::mt19937_64 rng(61);
  SystemFile f;
  f.system = random_system(2, {1, 2, 3, 1}, rng);
  f.label = "random";
  auto g = parse_system(dump_system(f));
  CHECK(g.label == "random");
  CHECK(g.system.dims == f.system.dims);
  CHECK(g.system.alphabet == f.system.alphabet);
  for (std::size_t i = 0; i < f.system.H.size(); ++i) CHECK((g.system.H[i] - f.system.H[i]).norm() == 0.0);
  CHECK_FALSE(g.forms.has_value());
}

TEST_CASE("normalize output reloads and renormalizes unchanged") {
  std::mt19937_64 rng(62);
  SystemFile f;
  f.system = random_system(3, {1, 2, 1, 2, 2, 1}, rng);
  auto ns = normalize(f.system);
  SystemFile out{ns.system, ns.forms, "n"};
  auto back = parse_system(dump_system(out));
  REQUIRE(back.forms.has_value());
  auto ns2 = normalize(back.system);
  for (std::size_t i = 0; i < ns.system.H.size(); ++i) CHECK(rel_diff(ns2.system.H[i], ns.system.H[i]) < 1e-9);
  for (Letter a = 0; a < 6; ++a) {
    CHECK(rel_diff(ns2.B(a), ns.B(a)) < 1e-9);
    CHECK(rel_diff(back.forms->B[static_cast<std::size_t>(a)], ns.B(a)) == 0.0);
  }
}

TEST_CASE("syntax errors carry line and column") {
  CHECK(error_line("{\n  \"generators\": [\"a\",\n  ]\n}") == 3);
  CHECK(error_code("{\"generators\": [\"a\"]") == "syntax");
  CHECK(error_code("[1, 2]") == "format");
}

TEST_CASE("semantic errors") {
  const std::string dims = R"("generators": ["a", "b"], "dims": {"a": 1, "a^-1": 1, "b": 1, "b^-1": 1})";
  CHECK(error_code("{" + dims + R"(, "H": {"a^-1|a": [[[1, 0]]]}})") == "inverse-pair");
  CHECK(error_code("{" + dims + R"(, "H": {"c|a": [[[1, 0]]]}})") == "format");
  CHECK(error_code("{" + dims + R"(, "H": {"b|a": [[[1, 0]], [[1, 0]]]}})") == "shape");
  CHECK(error_code("{" + dims + R"(, "H": {"b|a": [[1.0]]}})") == "format");
  CHECK(error_code(R"({"generators": ["a"], "dims": {"a": 1, "a^-1": 1}})") == "format");
  CHECK(error_code(R"({"generators": ["a", "b"], "dims": {"a": 1, "b": 1, "b^-1": 1}})") == "dims");
  CHECK(error_code(R"({"generators": ["a", "b"], "dims": {"a": 0, "a^-1": 1, "b": 1, "b^-1": 1}})") == "dims");
  CHECK(error_code("{" + dims + R"(, "extra": 1})") == "format");
  CHECK(error_code("{" + dims + R"(, "B": {"a": [[[1, 0]]]}})") == "format");
  // absent keys are zero blocks; validation then flags the all-zero system
  auto z = parse_system("{" + dims + "}");
  CHECK_FALSE(validate(z.system).empty());
}

TEST_CASE("edge parsing") {
  auto sys = endpoint_system(2);
  auto t = parse_edge(sys, "e|a");
  CHECK(t.tail.empty());
  CHECK(t.letter == 0);
  auto u = parse_edge(sys, "a.b|a^-1");
  CHECK(u.tail == Word{0, 2});
  CHECK(u.letter == 1);
  CHECK_THROWS(parse_edge(sys, "a.b|a^-1|2"));
  CHECK_THROWS(parse_edge(sys, "a.b|b^-1"));
  CHECK_THROWS(parse_edge(sys, "a|a^-1"));
  CHECK_THROWS(parse_edge(sys, "e"));
  CHECK_THROWS(parse_edge(sys, "e|z"));
}

TEST_CASE("series CSV") {
  CoefficientSeries s;
  s.s = {1.0, 2.0 / 3.0};
  const std::string csv = series_csv(s);
  CHECK(csv.rfind("n,s_n\n0,1\n1,0.6666666666666666", 0) == 0);
}

TEST_CASE("pipeline report: S0 content and determinism") {
  SystemFile f = parse_system(s0_text());
  PipelineOptions opt;
  opt.nmax = 12;
  auto r1 = run_pipeline(f, opt);
  auto r2 = run_pipeline(f, opt);
  CHECK(r1.report.dump() == r2.report.dump());
  CHECK(r1.exit_code == 0);
  const auto& r = r1.report;
  CHECK(r["class"] == "BII");
  CHECK(r["dim_one"] == 2);
  CHECK(r["predicted_exponent"] == 3);
  CHECK(r["verdict"] == "monotony");
  CHECK(std::abs(r["measured_exponent"]["fit"]["p"].get<double>() - 3.0) <= 0.3);
  CHECK(r["residuals"]["compatibility"]["ok"] == true);
  // serial and parallel kernels give the same report
  opt.exec = Exec::serial;
  CHECK(run_pipeline(f, opt).report.dump() == r1.report.dump());
}

TEST_CASE("budget exhaustion is flagged as partial") {
  SystemFile f = parse_system(s0_text());
  PipelineOptions opt;
  opt.budget = 1e4;
  auto run = run_pipeline(f, opt);
  CHECK(run.exit_code == 2);
  CHECK(run.report["partial"] == true);
  CHECK(run.report["measured_exponent"]["complete"] == false);
}
