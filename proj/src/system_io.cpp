#include "freerep/system_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace freerep {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) { throw SystemFileError(msg, code); }

// nlohmann reports a byte offset; turn it into line/column.
std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

cplx entry_from_json(const json& e, const std::string& where) {
  if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
    fail("format", where + ": entries must be [re, im] pairs");
  return {e[0].get<double>(), e[1].get<double>()};
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SystemFileError("cannot open " + path, "io");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ojson matrix_to_json(const Mat& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(ojson::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail("format", where + ": expected a non-empty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) fail("format", where + ": rows must be lists");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      fail("format", where + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = entry_from_json(r[static_cast<std::size_t>(c)], where);
  }
  return m;
}

SystemFile parse_system(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte);
    throw SystemFileError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col),
                          "syntax", line, col);
  }
  if (!doc.is_object()) fail("format", "top level must be an object");
  static const std::set<std::string> known{"generators", "dims", "H", "B", "label"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) fail("format", "unknown field \"" + key + "\"");

  if (!doc.contains("generators") || !doc["generators"].is_array() || doc["generators"].empty())
    fail("format", "\"generators\" must be a non-empty list");
  std::vector<std::string> gens;
  std::set<std::string> seen;
  for (const auto& g : doc["generators"]) {
    if (!g.is_string()) fail("format", "generator names must be strings");
    std::string s = g.get<std::string>();
    if (s.empty() || s.find('|') != std::string::npos || s.find("^-1") != std::string::npos)
      fail("format", "bad generator name \"" + s + "\"");
    if (!seen.insert(s).second) fail("format", "duplicate generator \"" + s + "\"");
    gens.push_back(std::move(s));
  }
  if (gens.size() < 2) fail("format", "at least two generators are required");
  Alphabet alpha(gens);
  const int L = alpha.size();

  if (!doc.contains("dims") || !doc["dims"].is_object()) fail("format", "\"dims\" must be an object");
  std::vector<int> dims(static_cast<std::size_t>(L), 0);
  for (const auto& [key, val] : doc["dims"].items()) {
    auto a = alpha.find(key);
    if (!a) fail("dims", "dims: unknown letter \"" + key + "\"");
    if (!val.is_number_integer() || val.get<long long>() < 1 || val.get<long long>() > 64)
      fail("dims", "dims[\"" + key + "\"] must be an integer in [1, 64]");
    dims[static_cast<std::size_t>(*a)] = val.get<int>();
  }
  for (Letter a = 0; a < L; ++a)
    if (dims[static_cast<std::size_t>(a)] == 0)
      fail("dims", "dims: letter \"" + alpha.name(a) + "\" missing (every letter needs its inverse)");

  SystemFile out;
  out.system = MatrixSystem::zero(alpha, dims);
  if (doc.contains("H")) {
    if (!doc["H"].is_object()) fail("format", "\"H\" must be an object");
    for (const auto& [key, val] : doc["H"].items()) {
      const auto bar = key.find('|');
      if (bar == std::string::npos) fail("format", "H key \"" + key + "\" is not of the form \"b|a\"");
      auto b = alpha.find(key.substr(0, bar));
      auto a = alpha.find(key.substr(bar + 1));
      if (!a || !b) fail("format", "H key \"" + key + "\" references an unknown letter");
      if (*b == inverse(*a))
        fail("inverse-pair", "H key \"" + key + "\" is not allowed: H_ba must be zero when ba = e");
      Mat m = matrix_from_json(val, "H[\"" + key + "\"]");
      if (m.rows() != out.system.dim(*b) || m.cols() != out.system.dim(*a))
        fail("shape", "H[\"" + key + "\"] has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          ", expected " + std::to_string(out.system.dim(*b)) + "x" +
                          std::to_string(out.system.dim(*a)));
      out.system.h(*b, *a) = std::move(m);
    }
  }
  if (doc.contains("B")) {
    if (!doc["B"].is_object()) fail("format", "\"B\" must be an object");
    FormTuple t;
    for (Letter a = 0; a < L; ++a) t.B.emplace_back();
    for (const auto& [key, val] : doc["B"].items()) {
      auto a = alpha.find(key);
      if (!a) fail("format", "B: unknown letter \"" + key + "\"");
      Mat m = matrix_from_json(val, "B[\"" + key + "\"]");
      if (m.rows() != out.system.dim(*a) || m.cols() != out.system.dim(*a))
        fail("shape", "B[\"" + key + "\"] must be square of size " + std::to_string(out.system.dim(*a)));
      t.B[static_cast<std::size_t>(*a)] = std::move(m);
    }
    for (Letter a = 0; a < L; ++a)
      if (t.B[static_cast<std::size_t>(a)].size() == 0) fail("format", "B: letter \"" + alpha.name(a) + "\" missing");
    out.forms = std::move(t);
  }
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) fail("format", "\"label\" must be a string");
    out.label = doc["label"].get<std::string>();
  }
  return out;
}

SystemFile load_system(const std::string& path) { return parse_system(read_text_file(path)); }

ojson system_to_json(const SystemFile& f) {
  const auto& sys = f.system;
  const auto& alpha = sys.alphabet;
  ojson j;
  if (!f.label.empty()) j["label"] = f.label;
  j["generators"] = alpha.generators();
  ojson dims = ojson::object();
  for (Letter a = 0; a < sys.letters(); ++a) dims[alpha.name(a)] = sys.dim(a);
  j["dims"] = std::move(dims);
  ojson H = ojson::object();
  for (Letter b = 0; b < sys.letters(); ++b)
    for (Letter a = 0; a < sys.letters(); ++a) {
      if (b == inverse(a)) continue;
      const Mat& m = sys.h(b, a);
      if (m.cwiseAbs().maxCoeff() == 0.0) continue;
      H[alpha.name(b) + "|" + alpha.name(a)] = matrix_to_json(m);
    }
  j["H"] = std::move(H);
  if (f.forms) {
    ojson B = ojson::object();
    for (Letter a = 0; a < sys.letters(); ++a) B[alpha.name(a)] = matrix_to_json(f.forms->B[static_cast<std::size_t>(a)]);
    j["B"] = std::move(B);
  }
  return j;
}

std::string dump_system(const SystemFile& f) { return system_to_json(f).dump(2) + "\n"; }

}  // namespace freerep
