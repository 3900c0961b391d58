#include "doctest.h"

#include <filesystem>
#include <random>

#include "quasi/errors.hpp"
#include "quasi/matrix_json.hpp"
#include "support.hpp"

using namespace quasi;

TEST_CASE("matrix json round trip is exact") {
  std::mt19937_64 rng(9);
  for (Index n : {1, 2, 5}) {
    const Matrix m = testing::random_gaussian(n, rng);
    const Json j = matrix_to_json(m);
    CHECK(j["dim"] == n);
    CHECK(matrix_from_json(j) == m);
    // through text as well
    CHECK(matrix_from_json(Json::parse(j.dump())) == m);
  }
}

TEST_CASE("matrix json layout is row-major [re, im]") {
  const Json j = Json::parse(R"({"dim": 2, "entries": [[[1, 0], [2, 3]], [[0, -1], [4, 0]]]})");
  const Matrix m = matrix_from_json(j);
  CHECK(m(0, 1) == cplx(2.0, 3.0));
  CHECK(m(1, 0) == cplx(0.0, -1.0));
}

TEST_CASE("matrix json rejects malformed input") {
  const char* bad[] = {
      R"([1, 2])",
      R"({"entries": [[[1, 0]]]})",
      R"({"dim": 0, "entries": []})",
      R"({"dim": 2.5, "entries": []})",
      R"({"dim": 2, "entries": [[[1, 0], [0, 0]]]})",
      R"({"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0]]]})",
      R"({"dim": 2, "entries": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]]]})",
      R"({"dim": 1, "entries": [[[1]]]})",
      R"({"dim": 1, "entries": [[["1", 0]]]})",
      R"({"dim": 1, "entries": [[1]]})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(matrix_from_json(Json::parse(text)), ParseError);
  }
}

TEST_CASE("matrix lists") {
  const std::vector<Matrix> ms{identity(2), testing::pauli_x()};
  CHECK(matrices_from_json(matrices_to_json(ms)) == ms);
  CHECK_THROWS_AS(matrices_from_json(Json::object()), ParseError);
}

TEST_CASE("json files") {
  const auto path = std::filesystem::temp_directory_path() / "quasi_matrix_json_test.json";
  write_json_file(path, matrix_to_json(testing::pauli_y()));
  CHECK(matrix_from_json(read_json_file(path)) == testing::pauli_y());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_json_file(path), ParseError);
}
