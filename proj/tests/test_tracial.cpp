#include "doctest.h"

#include <cmath>
#include <random>

#include "quasi/errors.hpp"
#include "quasi/scenario.hpp"
#include "quasi/tracial.hpp"
#include "support.hpp"

using namespace quasi;
using testing::max_abs;

namespace {

ExampleInstance rotation(double lambda) {
  ExampleParams p;
  p.lambda = lambda;
  return build_example("ex2", p);
}

// HS distance from c to span{I/sqrt2, J/sqrt2}, J = [[0, 1], [-1, 0]], by
// explicit projection on the two orthonormal elements.
double rotation_fixed_residual(const Matrix& c) {
  Matrix j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  const Matrix e1 = identity(2) / std::sqrt(2.0);
  const Matrix e2 = j / std::sqrt(2.0);
  const Matrix proj = (e1.adjoint() * c).trace() * e1 + (e2.adjoint() * c).trace() * e2;
  return (c - proj).norm();
}

}  // namespace

TEST_CASE("ergodicity gate on full matrix algebras") {
  const auto ex = rotation(2.0 / 3.0);
  const auto gate = ergodicity_on_center(ex.instance.action);
  CHECK(gate.ergodic);
  CHECK(gate.intersection_dim == 1);
}

TEST_CASE("rotation example: residual of c against F(G)") {
  for (double lambda : {2.0 / 3.0, 0.9, 0.25}) {
    CAPTURE(lambda);
    const auto ex = rotation(lambda);
    const auto& st = *ex.instance.state;
    const auto fam = classify_invariance(st, ex.instance.action);
    const auto d = tracial_decomposition(st, fam);
    CHECK(max_abs(d.c - testing::diag2(lambda, 1.0 - lambda)) < 1e-12);
    const double oracle = rotation_fixed_residual(d.c);
    CHECK(oracle == doctest::Approx(std::abs(2.0 * lambda - 1.0) / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(d.c_in_FG_residual - oracle) < 1e-10);
    CHECK(d.c_in_FG_residual > 0.0);
    // b is the G-invariant density of phi_G = Tr/2
    CHECK(max_abs(d.b - identity(2) / 2.0) < 1e-12);
    CHECK(reconstruction_deviation(st, d) <= 1e-10);
    CHECK(check_tracial_decomposition(st, fam, d).status == Status::holds);
    CHECK(mean_density_checks(st, fam).status == Status::holds);
  }
}

TEST_CASE("rotation example at the symmetric point: c = I/2 is fixed") {
  const auto ex = rotation(0.5);
  const auto fam = classify_invariance(*ex.instance.state, ex.instance.action);
  const auto d = tracial_decomposition(*ex.instance.state, fam);
  CHECK(max_abs(d.c - identity(2) / 2.0) < 1e-14);
  CHECK(d.c_in_FG_residual <= 1e-12);
}

TEST_CASE("spin flip: c = rho lies in F(G)") {
  ExampleParams p;
  p.lambda = 0.7;
  p.mu = 0.3;
  const auto ex = build_example("ex4", p);
  const auto fam = classify_invariance(*ex.instance.state, ex.instance.action);
  const auto d = tracial_decomposition(*ex.instance.state, fam);
  CHECK(max_abs(d.c - ex.instance.state->density()) < 1e-14);
  CHECK(d.c_in_FG_residual <= 1e-12);
  CHECK(max_abs(d.b - d.c) < 1e-14);  // kappa = I
}

TEST_CASE("decomposition on strongly quasi fuzz instances: property") {
  for (std::size_t trial = 0; trial < 10; ++trial) {
    const Index n = 2 + static_cast<Index>(trial % 3);
    const auto inst = random_instance(n, 2 + trial % 2, FuzzFamily::strongly_quasi, 31, trial);
    const auto& st = *inst.state;
    const auto fam = classify_invariance(st, inst.action);
    REQUIRE(fam.strongly_quasi());
    const auto d = tracial_decomposition(st, fam);
    CHECK(reconstruction_deviation(st, d) <= 1e-10);
    CHECK(check_tracial_decomposition(st, fam, d).status == Status::holds);
    CHECK(mean_density_checks(st, fam).status == Status::holds);
    // residual against F(G) from the least-squares oracle
    const auto fixed = fixed_point_algebra(inst.action);
    CHECK(std::abs(d.c_in_FG_residual - testing::oracle_span_residual(fixed.basis(), d.c)) < 1e-9);
    // b in F(G) and [b, kappa^{-1}] = 0
    CHECK(fixed.residual(d.b) < 1e-9);
    const Matrix kinv = kappa(fam).inverse();
    CHECK(max_abs(d.b * kinv - kinv * d.b) < 1e-9 * (1.0 + max_abs(kinv)));
  }
}

TEST_CASE("decomposition requires strong quasi invariance") {
  std::mt19937_64 rng(51);
  const FaithfulState st(testing::random_density(2, rng));
  const auto action = rotation(2.0 / 3.0).instance.action;
  const auto fam = classify_invariance(st, action);
  REQUIRE_FALSE(fam.strongly_quasi());
  CHECK_THROWS_AS(tracial_decomposition(st, fam), NotStronglyQuasiInvariant);
  CHECK(mean_density_checks(st, fam).status == Status::not_applicable);
}
