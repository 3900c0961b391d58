#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "quasi/errors.hpp"
#include "quasi/report.hpp"
#include "quasi/scenario.hpp"
#include "support.hpp"

using namespace quasi;
using testing::max_abs;

namespace {

std::vector<std::string> ids_of(const std::vector<Verdict>& vs) {
  std::vector<std::string> out;
  for (const auto& v : vs) out.push_back(v.check_id);
  return out;
}

const Verdict& find(const Report& r, const std::string& id) {
  for (const auto& v : r.checks)
    if (v.check_id == id) return v;
  FAIL("missing check " << id);
  return r.checks.front();
}

}  // namespace

TEST_CASE("registry ids are unique and fully traced") {
  const auto& ids = registered_checks();
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size());
  const auto audit = audit_traceability();
  CHECK(audit.ok());
  CHECK(audit.untraced_results.empty());
  CHECK(audit.unknown_ids.empty());
  CHECK(audit.unmapped_checks.empty());
}

TEST_CASE("every report lists the registry in order") {
  for (const char* id : {"ex1", "ex2", "ex4"}) {
    CAPTURE(id);
    const Report r = run_example(id, {});
    CHECK(ids_of(r.checks) == registered_checks());
  }
  const auto inst = random_instance(2, 2, FuzzFamily::generic, 3, 0);
  CHECK(ids_of(run_instance(inst).checks) == registered_checks());
}

TEST_CASE("example reports") {
  SUBCASE("rotation example at beta = ln 2") {
    ExampleParams p;
    p.beta = std::log(2.0);
    const Report r = run_example("ex2", p);
    CHECK(run_passed(r));
    CHECK(find(r, "example.closed_forms").status == Status::holds);
    for (const char* id : {"gns.relation.s_exchange", "gns.relation.f_exchange",
                           "gns.relation.delta_factorization", "gns.relation.s_g_formula",
                           "gns.relation.delta_g_sqrt_formula", "gns.relation.u_s_g_formula",
                           "gns.shift.j_equality", "gns.shift.cone", "gns.abelianness"}) {
      CAPTURE(id);
      CHECK(find(r, id).status == Status::holds);
    }
    CHECK(r.diagnostics["classification"] == "strongly-quasi-invariant");
  }
  SUBCASE("spin flip: everything applicable holds") {
    ExampleParams p;
    p.lambda = 0.7;
    p.mu = 0.3;
    const Report r = run_example("ex4", p);
    const auto s = summarize(r);
    CHECK(s.fails == 0);
    CHECK(s.not_applicable == 0);
    CHECK(find(r, "flow.ergodic_coincidence").max_deviation <= 1e-10);
  }
  SUBCASE("spin flip at lambda = mu is not applicable for the ergodic check") {
    ExampleParams p;
    p.lambda = 0.5;
    p.mu = 0.5;
    const Report r = run_example("ex4", p);
    CHECK(find(r, "flow.ergodic_coincidence").status == Status::not_applicable);
    CHECK(run_passed(r));
  }
  SUBCASE("quasi-only functional reports not-applicable rather than fail") {
    const Report r = run_example("ex1", {});
    CHECK(run_passed(r));
    CHECK(find(r, "qi.cocycle.chain_rule").status == Status::holds);
    CHECK(find(r, "example.closed_forms").status == Status::holds);
  }
  SUBCASE("ring with equal K_i is invariant and commutes with the flow") {
    ExampleParams p;
    p.sites = 2;
    p.k = {testing::diag2(1.0, 2.5)};
    const Report r = run_example("ex3", p);
    CHECK(run_passed(r));
    CHECK(r.diagnostics["classification"] == "G-invariant");
    CHECK(find(r, "flow.group_commutation").status == Status::holds);
  }
}

TEST_CASE("invalid example parameters") {
  ExampleParams bad_sites;
  bad_sites.sites = 4;
  CHECK_THROWS_AS(build_example("ex3", bad_sites), InvalidParams);
  bad_sites.sites = 1;
  CHECK_THROWS_AS(build_example("ex3", bad_sites), InvalidParams);

  ExampleParams weights;
  weights.lambda = 0.6;
  weights.mu = 0.6;
  CHECK_THROWS_AS(build_example("ex4", weights), InvalidParams);

  ExampleParams lam;
  lam.lambda = 1.2;
  CHECK_THROWS_AS(build_example("ex2", lam), InvalidParams);
  lam.lambda = 0.3;
  lam.beta = 1.0;
  CHECK_THROWS_AS(build_example("ex2", lam), InvalidParams);

  ExampleParams nondiag;
  nondiag.sites = 2;
  nondiag.k = {testing::pauli_x() + 3.0 * identity(2)};
  CHECK_THROWS_AS(build_example("ex3", nondiag), InvalidParams);

  ExampleParams kbad;
  kbad.k = {testing::diag2(1.0, 2.0)};
  CHECK_THROWS_AS(build_example("ex1", kbad), InvalidParams);

  CHECK_THROWS_AS(build_example("ex9", {}), InvalidParams);
}

TEST_CASE("group spec and family parsing") {
  CHECK(parse_group_spec("cyclic:4") == 4);
  CHECK(parse_group_spec("cyclic:64") == 64);
  for (const char* bad : {"cyclic:0", "cyclic:65", "cyclic:", "cyclic:x", "dihedral:4", "4"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_group_spec(bad), InvalidParams);
  }
  CHECK(parse_family("commuting") == FuzzFamily::commuting);
  CHECK_THROWS_AS(parse_family("other"), InvalidParams);
  CHECK(family_for_trial(FuzzFamily::mixed, 0) != family_for_trial(FuzzFamily::mixed, 1));
  CHECK(family_for_trial(FuzzFamily::generic, 5) == FuzzFamily::generic);
}

TEST_CASE("ring translation shifts tensor factors cyclically") {
  ExampleParams p;
  p.sites = 3;
  const auto ex = build_example("ex3", p);
  const auto& action = ex.instance.action;
  REQUIRE(action.order() == 3);
  const Matrix a = testing::diag2(1.0, 2.0);
  const Matrix b = testing::pauli_x();
  const Matrix c = testing::pauli_y();
  const Matrix abc = kron(kron(a, b), c);
  const Matrix g1 = action.apply(1, abc);
  // a single step moves every factor by one site, in one direction or the other
  const bool left = max_abs(g1 - kron(kron(b, c), a)) < 1e-14;
  const bool right = max_abs(g1 - kron(kron(c, a), b)) < 1e-14;
  CHECK((left || right));
  CHECK(max_abs(action.apply(2, action.apply(1, abc)) - abc) < 1e-14);
}

TEST_CASE("fuzz is deterministic and independent of the thread count") {
  FuzzParams p;
  p.dim = 3;
  p.group_order = 3;
  p.trials = 12;
  p.seed = 7;
  p.threads = 1;
  const std::string one = report_to_json(fuzz(p)).dump();
  p.threads = 3;
  const std::string three = report_to_json(fuzz(p)).dump();
  CHECK(one == three);
  CHECK(report_to_json(fuzz(p)).dump() == three);
  p.seed = 8;
  CHECK(report_to_json(fuzz(p)).dump() != three);
}

TEST_CASE("random instances are reproducible per (seed, trial)") {
  const auto a = random_instance(3, 2, FuzzFamily::mixed, 99, 4);
  const auto b = random_instance(3, 2, FuzzFamily::mixed, 99, 4);
  CHECK(a.functional.density() == b.functional.density());
  CHECK(a.action.map(1).implementing_unitary() == b.action.map(1).implementing_unitary());
}

TEST_CASE("fuzz families land in their intended classes") {
  for (std::size_t trial = 0; trial < 6; ++trial) {
    const auto sq = random_instance(3, 3, FuzzFamily::strongly_quasi, 2, trial);
    REQUIRE(sq.state.has_value());
    CHECK(classify_invariance(*sq.state, sq.action).strongly_quasi());
    const auto cm = random_instance(3, 3, FuzzFamily::commuting, 2, trial);
    REQUIRE(cm.state.has_value());
    CHECK(classify_invariance(*cm.state, cm.action).strongly_quasi());
  }
}

TEST_CASE("fuzz rejects bad parameters") {
  FuzzParams p;
  p.dim = 1;
  CHECK_THROWS_AS(fuzz(p), InvalidParams);
  p.dim = 2;
  p.trials = 0;
  CHECK_THROWS_AS(fuzz(p), InvalidParams);
}

TEST_CASE("report json shape") {
  ExampleParams p;
  p.lambda = 0.7;
  p.mu = 0.3;
  const Json j = report_to_json(run_example("ex4", p));
  CHECK(j["schema"] == 1);
  CHECK(j["scenario"] == "ex4");
  CHECK(j["checks"].size() == registered_checks().size());
  CHECK(j["summary"]["holds"] == registered_checks().size());
  CHECK(j["environment"].contains("kernel_backend"));
  CHECK(j["traceability"].is_array());
  const std::string text = report_to_text(run_example("ex4", p));
  CHECK(text.find("flow.ergodic_coincidence") != std::string::npos);
}

TEST_CASE("user-supplied state and action") {
  const FaithfulState st(testing::diag2(0.6, 0.4));
  const auto action = build_action(cyclic_group(2), {identity(2), testing::pauli_z()});
  const Report r = check_state_action(st, action);
  CHECK(run_passed(r));
  CHECK(ids_of(r.checks) == registered_checks());
}
