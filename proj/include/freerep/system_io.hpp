#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "freerep/matrix_system.hpp"

namespace freerep {

// JSON exchange format for matrix systems:
//   { "generators": ["a", "b"],
//     "dims": { "a": 1, "a^-1": 1, ... },
//     "H": { "b|a": [[[re, im], ...], ...], ... },   // row-major, maps V_a -> V_b
//     "B": { "a": ..., ... },                        // optional
//     "label": "..." }                               // optional
// Missing "b|a" keys are zero blocks.
struct SystemFile {
  MatrixSystem system;
  std::optional<FormTuple> forms;
  std::string label;
};

// Parse or semantic error. line and column are 1-based and only set for
// syntax errors.
class SystemFileError : public std::runtime_error {
public:
  SystemFileError(const std::string& what, std::string code, int line = 0, int column = 0)
      : std::runtime_error(what), code_(std::move(code)), line_(line), column_(column) {}
  const std::string& code() const noexcept { return code_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  std::string code_;
  int line_;
  int column_;
};

SystemFile parse_system(const std::string& text);
SystemFile load_system(const std::string& path);

nlohmann::ordered_json matrix_to_json(const Mat& m);
Mat matrix_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::ordered_json system_to_json(const SystemFile& f);
std::string dump_system(const SystemFile& f);

std::string read_text_file(const std::string& path);

}  // namespace freerep
