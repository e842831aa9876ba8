#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "freerep/coefficients.hpp"
#include "freerep/series.hpp"
#include "freerep/spectral.hpp"
#include "freerep/system_io.hpp"

namespace freerep {

inline constexpr const char* kToolVersion = "0.3.0";

struct PipelineOptions {
  Tolerances tol;
  int nmax = 10;              // sphere sums for the measured exponent
  std::uint64_t seed = 1;     // finite-rank sketches
  int w_depth = 2;            // isometry / intertwining checked on W_{w_depth}
  int fin_nmax = 4;
  int rank_nmin = 2;
  int rank_nmax = 4;
  double budget = 4e9;        // series work units, see series_work()
  Exec exec = Exec::parallel;
  std::string vector = "e|a";  // edge spec for the exponent vector, see parse_edge
  int long_n = 0;             // length of the moment series; 0 picks it from the gap
};

struct PipelineRun {
  nlohmann::ordered_json report;
  CoefficientSeries series;
  SpectralReport spectral;
  int exit_code = 0;  // 0 decided, 2 undecided or partial
};

// Runs normalize, classify, the class-specific verification suite and the
// sphere sums. Throws what normalize throws.
PipelineRun run_pipeline(const SystemFile& input, const PipelineOptions& opt);

// Report for an already generated instance (demos); `extra` is merged into
// the top level as "instance".
PipelineRun run_pipeline(const NormalizedSystem& nsys, const std::string& label, const PipelineOptions& opt,
                         const nlohmann::ordered_json& extra = nullptr);

// "x|a" or "x|a|i": the edge from x to x·a carrying basis vector i
// (0-based, default 0) of V_a. x is "e" or dot-separated letters.
EdgeTerm parse_edge(const MatrixSystem& sys, std::string_view text);

std::string series_csv(const CoefficientSeries& s);
nlohmann::ordered_json series_json(const CoefficientSeries& s, const std::string& vector);

// Path of the bundled report schema.
std::string report_schema_path();

}  // namespace freerep
