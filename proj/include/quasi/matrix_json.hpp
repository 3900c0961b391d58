#pragma once

// Repo-wide matrix JSON: {"dim": n, "entries": [[[re, im], ...], ...]}, row-major.

#include <filesystem>
#include <json.hpp>

#include "quasi/linalg.hpp"

namespace quasi {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m);

/// Throws ParseError on a missing field, ragged or non-square entries, a
/// dim that disagrees with the entries, or a malformed [re, im] pair.
Matrix matrix_from_json(const Json& j);

Json matrices_to_json(const std::vector<Matrix>& ms);
std::vector<Matrix> matrices_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace quasi
