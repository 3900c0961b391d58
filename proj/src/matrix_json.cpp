#include "quasi/matrix_json.hpp"

#include <fstream>
#include <string>

#include "quasi/errors.hpp"

namespace quasi {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  Json out;
  out["dim"] = m.rows();
  out["entries"] = std::move(rows);
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("matrix must be a JSON object");
  if (!j.contains("dim") || !j.contains("entries")) {
    throw ParseError("matrix object needs \"dim\" and \"entries\"");
  }
  if (!j["dim"].is_number_integer() || j["dim"].get<long long>() <= 0) {
    throw ParseError("\"dim\" must be a positive integer");
  }
  const auto n = static_cast<Index>(j["dim"].get<long long>());
  const Json& rows = j["entries"];
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n) {
    throw ParseError("\"entries\" must hold exactly dim rows");
  }
  Matrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    const Json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) {
      throw ParseError("row " + std::to_string(r) + " does not have dim entries");
    }
    for (Index c = 0; c < n; ++c) {
      const Json& z = row[static_cast<std::size_t>(c)];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
        throw ParseError("entry (" + std::to_string(r) + ", " + std::to_string(c) +
                         ") is not a [re, im] pair");
      }
      m(r, c) = cplx(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

Json matrices_to_json(const std::vector<Matrix>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> matrices_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("expected a JSON list of matrix objects");
  std::vector<Matrix> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(matrix_from_json(item));
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace quasi
