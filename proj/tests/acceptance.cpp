// Acceptance suite: one line per criterion, exit status 1 if any fails.
// Optional argv[1]: path to the quasilab executable, used for the CLI half of
// the determinism criterion.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "quasi/errors.hpp"
#include "quasi/gns.hpp"
#include "quasi/modular_flow.hpp"
#include "quasi/report.hpp"
#include "quasi/scenario.hpp"
#include "quasi/tracial.hpp"

using namespace quasi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  // the first few problems, for the line printed on failure
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (problems.size() < 4) problems.push_back(what);
  }
};

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

ExampleInstance example(const char* id, std::optional<double> lambda = {}, std::optional<double> mu = {}) {
  ExampleParams p;
  p.lambda = lambda;
  p.mu = mu;
  return build_example(id, p);
}

ExampleInstance ring_equal_k() {
  ExampleParams p;
  p.sites = 3;
  p.k = {diag2(1.0, 3.0)};
  return build_example("ex3", p);
}

ExampleInstance rotation_ln2() {
  ExampleParams p;
  p.beta = std::log(2.0);
  return build_example("ex2", p);
}

// 100 trials over dims 2..4 and Z_2..Z_4, families cycling
std::vector<Instance> fuzz_corpus(std::size_t trials, FuzzFamily family, std::uint64_t seed) {
  std::vector<Instance> out;
  for (std::size_t k = 0; k < trials; ++k) {
    const Index dim = 2 + static_cast<Index>(k % 3);
    const std::size_t order = 2 + (k / 3) % 3;
    out.push_back(random_instance(dim, order, family, seed, k));
  }
  return out;
}

std::vector<Instance> example_instances() {
  std::vector<Instance> out;
  out.push_back(build_example("ex1", {}).instance);
  out.push_back(rotation_ln2().instance);
  out.push_back(build_example("ex3", {}).instance);
  out.push_back(ring_equal_k().instance);
  out.push_back(example("ex4", 0.7, 0.3).instance);
  return out;
}

Outcome criterion1() {
  Outcome o;
  const auto ex = rotation_ln2();
  const auto& action = ex.instance.action;
  const auto fam = classify_invariance(*ex.instance.state, action);
  const double beta = std::log(2.0);
  double worst = 0.0;
  auto within = [&](const Matrix& a, const Matrix& b, const std::string& what) {
    const double d = max_abs(a - b);
    worst = std::max(worst, d);
    o.require(d <= 1e-12, what + " off by " + fmt(d));
  };
  // group elements are indexed by quarter turns: 0, pi/2, pi, 3pi/2
  within(fam.cocycle(0), identity(2), "x_{g_0}");
  within(fam.cocycle(2), identity(2), "x_{g_pi}");
  within(fam.cocycle(1), diag2(std::exp(-beta), std::exp(beta)), "x_{g_pi/2}");
  within(fam.cocycle(3), diag2(std::exp(-beta), std::exp(beta)), "x_{g_3pi/2}");
  within(kappa(fam), diag2(0.75, 1.5), "kappa");
  const auto phi_g = averaged_state(*ex.instance.state, fam);
  for (const auto& e : matrix_units(2)) {
    const double d = std::abs(phi_g.evaluate(e) - e.trace() / 2.0);
    worst = std::max(worst, d);
    o.require(d <= 1e-12, "phi_G off by " + fmt(d));
    const cplx s = (e(0, 0) + e(1, 1)) / 2.0;
    const cplx t = (e(0, 1) - e(1, 0)) / 2.0;
    Matrix want(2, 2);
    want << s, t, -t, s;
    within(mean_over_group(action, e), want, "E_G");
  }
  // and the full battery for this example
  const Report r = run_example("ex2", ExampleParams{.beta = beta});
  o.require(run_passed(r), "ex2 report has failing checks");
  o.detail = "max dev " + fmt(worst);
  return o;
}

Outcome criterion2() {
  Outcome o;
  double worst = 0.0;
  std::size_t families = 0;
  auto run = [&](const CocycleFamily& fam, const std::string& label) {
    ++families;
    for (const auto& v : {check_cocycle_identity(fam), check_chain_rule(fam), check_inverse_law(fam)}) {
      worst = std::max(worst, v.max_deviation);
      o.require(v.status == Status::holds && v.max_deviation <= 1e-9,
                label + " " + v.check_id + " dev " + fmt(v.max_deviation));
    }
  };
  for (const auto& inst : example_instances()) {
    run(classify_invariance(inst.functional, inst.action), inst.label);
  }
  for (const auto& inst : fuzz_corpus(100, FuzzFamily::mixed, 2024)) {
    run(classify_invariance(inst.functional, inst.action), inst.label);
  }
  o.detail = std::to_string(families) + " families, max dev " + fmt(worst);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const Tolerance tol(1e-8, 0.0);
  double worst = 0.0;
  std::size_t count = 0;
  auto run = [&](const FaithfulState& st, const GroupAction& action, const std::string& label) {
    ++count;
    const auto fam = classify_invariance(st, action);
    o.require(fam.strongly_quasi(), label + " is not strongly quasi invariant");
    if (!fam.strongly_quasi()) return;
    const GnsSystem gns(st);
    const auto shifts = shifts_for(gns, fam);
    std::vector<Verdict> vs = check_modular_relations(gns, shifts, tol);
    vs.push_back(check_shift_j(gns, shifts, tol));
    vs.push_back(check_shift_cone(gns, shifts, tol));
    for (const auto& v : vs) {
      worst = std::max(worst, v.max_deviation);
      o.require(v.status == Status::holds && v.max_deviation <= 1e-8,
                label + " " + v.check_id + " dev " + fmt(v.max_deviation));
    }
  };
  const auto ex = rotation_ln2();
  run(*ex.instance.state, ex.instance.action, "ex2");
  for (const auto& inst : fuzz_corpus(50, FuzzFamily::strongly_quasi, 77)) {
    run(*inst.state, inst.action, inst.label);
  }
  o.detail = std::to_string(count) + " instances, max dev " + fmt(worst);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const Tolerance tol(1e-9, 1e-9);
  std::size_t count = 0;
  auto run = [&](const Instance& inst) -> std::optional<FlowGroupCommutation> {
    if (!inst.state) return std::nullopt;
    ++count;
    const ModularFlow flow(*inst.state);
    const auto fam = classify_invariance(*inst.state, inst.action, tol);
    const auto comm = check_flow_group_commutation(flow, fam, tol);
    const auto eq = check_invariance_equivalence(flow, fam, comm, tol);
    o.require(eq.verdict.status == Status::holds,
              inst.label + " invariance predicates disagree");
    o.require(comm.verdict.status == Status::holds,
              inst.label + " commutation biconditional disagrees");
    return comm;
  };
  for (const auto& inst : example_instances()) run(inst);
  for (const auto& inst : fuzz_corpus(100, FuzzFamily::mixed, 2024)) run(inst);
  for (const auto& inst : fuzz_corpus(30, FuzzFamily::commuting, 31)) run(inst);

  // designed positive and negative families
  const auto ring = run(ring_equal_k().instance);
  o.require(ring && ring->commute && ring->central_cocycles, "ex3 with equal K_i should commute");
  const auto flip = run(example("ex4", 0.7, 0.3).instance);
  o.require(flip && flip->commute && flip->central_cocycles, "ex4 should commute");
  for (double lambda : {2.0 / 3.0, 0.2, 0.9}) {
    const auto rot = run(example("ex2", lambda).instance);
    o.require(rot && !rot->commute && !rot->central_cocycles, "ex2 should not commute");
  }
  o.detail = std::to_string(count) + " instances";
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto ex = example("ex4", 0.7, 0.3);
  const ModularFlow flow(*ex.instance.state);
  double worst = 0.0;
  for (const auto& e : matrix_units(2)) {
    worst = std::max(worst, max_abs(mean_over_group(ex.instance.action, e) - modular_invariant_expectation(flow, e)));
  }
  o.require(worst <= 1e-10, "E_G - pinching = " + fmt(worst));
  const auto fam = classify_invariance(*ex.instance.state, ex.instance.action);
  const auto v = check_ergodic_coincidence(flow, fam);
  o.require(v.status == Status::holds, "ergodic check on (0.7, 0.3) is " + std::string(status_name(v.status)));

  const auto half = example("ex4", 0.5, 0.5);
  const ModularFlow hflow(*half.instance.state);
  const auto hfam = classify_invariance(*half.instance.state, half.instance.action);
  const auto hv = check_ergodic_coincidence(hflow, hfam);
  o.require(hv.status == Status::not_applicable,
            "lambda = mu reports " + std::string(status_name(hv.status)));
  o.detail = "max dev " + fmt(worst) + ", lambda = mu " + std::string(status_name(hv.status));
  return o;
}

Outcome criterion6() {
  Outcome o;
  constexpr double kHorizon = 200.0;
  constexpr std::size_t kNodes = 4001;
  std::mt19937_64 rng(606);
  std::normal_distribution<double> nd(0.0, 1.0);
  // both log-gaps >= 8 keep the trapezoid error bound (h/2T)(1/sin(w h/2) + 1)
  // under 1e-3; <= 9.5 keeps the smallest eigenvalue well above the faithfulness floor
  std::uniform_real_distribution<double> gap(8.0, 9.5);
  const double h = 2.0 * kHorizon / static_cast<double>(kNodes - 1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double a = gap(rng), b = gap(rng);
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = std::exp(-a);
    d(2, 2) = std::exp(-a - b);
    d /= d.trace().real();
    Matrix herm(3, 3);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) herm(i, j) = cplx(nd(rng), nd(rng));
    herm = (herm + herm.adjoint()).eval() / 2.0;
    const Matrix w = Matrix(kI * herm).exp();
    const ModularFlow flow{FaithfulState(w * d * w.adjoint())};
    // trapezoid over sigma_t evaluated directly, one unitary per node
    std::vector<Matrix> sums(9, Matrix::Zero(3, 3));
    const auto units = matrix_units(3);
    for (std::size_t m = 0; m < kNodes; ++m) {
      const double t = -kHorizon + h * static_cast<double>(m);
      const double weight = (m == 0 || m + 1 == kNodes) ? 0.5 : 1.0;
      const Matrix u = flow.unitary(t);
      for (std::size_t k = 0; k < units.size(); ++k) sums[k] += weight * (u * units[k] * u.adjoint());
    }
    for (std::size_t k = 0; k < units.size(); ++k) {
      const Matrix cesaro = sums[k] * (h / (2.0 * kHorizon));
      const double dev = max_abs(cesaro - modular_invariant_expectation(flow, units[k]));
      worst = std::max(worst, dev);
      o.require(dev < 1e-3, "trial " + std::to_string(trial) + " dev " + fmt(dev));
      // the library's spectral quadrature agrees with the direct one
      const double lib = max_abs(cesaro_flow_mean(flow, units[k], kHorizon, kNodes) - cesaro);
      o.require(lib < 1e-9, "library quadrature differs by " + fmt(lib));
    }
  }
  o.detail = "20 instances, max dev " + fmt(worst);
  return o;
}

Outcome criterion7() {
  Outcome o;
  const Tolerance tol(1e-9, 0.0);
  std::size_t count = 0;
  double worst = 0.0;
  auto run = [&](const Instance& inst) {
    if (!inst.state) return;
    const auto fam = classify_invariance(*inst.state, inst.action);
    if (!fam.strongly_quasi()) return;
    ++count;
    const GnsSystem gns(*inst.state);
    const auto shifts = shifts_for(gns, fam);
    const Matrix pg = projection_pg(shifts);
    for (const auto& v : check_lifted_expectation(gns, fam, shifts, pg, tol)) {
      worst = std::max(worst, v.max_deviation);
      o.require(v.status == Status::holds && v.max_deviation <= 1e-9,
                inst.label + " " + v.check_id + " dev " + fmt(v.max_deviation));
    }
    const auto ab = compressed_abelianness(gns, fam, shifts, pg);
    o.require(ab.agree, inst.label + " abelianness disagrees (" + ab.route + ")");
  };
  for (const auto& inst : example_instances()) run(inst);
  for (const auto& inst : fuzz_corpus(100, FuzzFamily::mixed, 2024)) run(inst);
  for (const auto& inst : fuzz_corpus(50, FuzzFamily::strongly_quasi, 77)) run(inst);

  const auto ex = rotation_ln2();
  const auto fam = classify_invariance(*ex.instance.state, ex.instance.action);
  const GnsSystem gns(*ex.instance.state);
  const auto shifts = shifts_for(gns, fam);
  const auto chain = subgroup_chain_limit(gns, fam, shifts, {{0}, {0, 2}, {0, 1, 2, 3}});
  o.require(chain.nested, "ex2 chain ranges not nested");
  o.require(chain.final_exact, "ex2 chain final stage not exact");
  o.detail = std::to_string(count) + " instances, block max dev " + fmt(worst) + ", chain final dev " +
             fmt(chain.stages.back().deviation);
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::size_t count = 0;
  double worst_rec = 0.0;
  auto run = [&](const Instance& inst) {
    if (!inst.state) return;
    const auto fam = classify_invariance(*inst.state, inst.action);
    if (!fam.strongly_quasi()) return;
    ++count;
    const auto m = mean_density_checks(*inst.state, fam);
    o.require(m.status == Status::holds, inst.label + " mean density " + std::string(status_name(m.status)));
    const auto d = tracial_decomposition(*inst.state, fam);
    const double rec = reconstruction_deviation(*inst.state, d);
    worst_rec = std::max(worst_rec, rec);
    o.require(rec <= 1e-10, inst.label + " reconstruction " + fmt(rec));
  };
  for (const auto& inst : example_instances()) run(inst);
  for (const auto& inst : fuzz_corpus(100, FuzzFamily::mixed, 2024)) run(inst);

  // rotation example: residual of c = diag(2/3, 1/3) against span{I, J}/sqrt2
  const auto ex = example("ex2", 2.0 / 3.0);
  const auto fam = classify_invariance(*ex.instance.state, ex.instance.action);
  const auto d = tracial_decomposition(*ex.instance.state, fam);
  Matrix j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  const Matrix e1 = identity(2) / std::sqrt(2.0), e2 = j / std::sqrt(2.0);
  const Matrix proj = (e1.adjoint() * d.c).trace() * e1 + (e2.adjoint() * d.c).trace() * e2;
  const double oracle = (d.c - proj).norm();
  o.require(d.c_in_FG_residual > 0.0, "ex2 residual is not positive");
  o.require(std::abs(d.c_in_FG_residual - oracle) <= 1e-10,
            "ex2 residual " + fmt(d.c_in_FG_residual) + " vs oracle " + fmt(oracle));

  const auto flip = example("ex4", 0.7, 0.3);
  const auto ffam = classify_invariance(*flip.instance.state, flip.instance.action);
  const double fres = tracial_decomposition(*flip.instance.state, ffam).c_in_FG_residual;
  o.require(fres <= 1e-12, "ex4 residual " + fmt(fres));
  o.detail = std::to_string(count) + " instances, reconstruction " + fmt(worst_rec) + ", ex2 residual " +
             fmt(d.c_in_FG_residual) + " (oracle " + fmt(oracle) + "), ex4 residual " + fmt(fres);
  return o;
}

std::string capture(const std::string& cmd) {
  std::string out;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), n);
  return out;
}

Outcome criterion9(const char* cli) {
  Outcome o;
  FuzzParams p{.dim = 3, .group_order = 3, .trials = 50, .seed = 7};
  const std::string a = report_to_json(fuzz(p)).dump(2);
  p.threads = 1;
  const std::string b = report_to_json(fuzz(p)).dump(2);
  o.require(a == b, "in-process reports differ");
  o.detail = "in-process " + std::to_string(a.size()) + " bytes";
  if (cli != nullptr) {
    const std::string cmd = std::string("'") + cli + "' fuzz --dim 3 --group cyclic:3 --trials 50 --seed 7";
    const std::string c1 = capture(cmd);
    const std::string c2 = capture(cmd);
    o.require(!c1.empty(), "CLI produced no output");
    o.require(c1 == c2, "CLI reports differ");
    o.detail += ", CLI " + std::to_string(c1.size()) + " bytes identical";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli = argc > 1 ? argv[1] : nullptr;
  struct Item {
    int id;
    const char* what;
    double limit_seconds;  // 0: none pinned
    std::function<Outcome()> run;
  };
  const std::vector<Item> items = {
      {1, "rotation example closed forms", 1.0, criterion1},
      {2, "cocycle identity suite", 30.0, criterion2},
      {3, "modular-theory suite", 0.0, criterion3},
      {4, "theorem-equivalence suites", 0.0, criterion4},
      {5, "ergodicity on the spin flip example", 0.0, criterion5},
      {6, "pinching vs Cesaro quadrature", 0.0, criterion6},
      {7, "projection lemma, abelianness, subgroup chain", 0.0, criterion7},
      {8, "mean density and tracial decomposition", 0.0, criterion8},
      {9, "fuzz report determinism", 0.0, [cli] { return criterion9(cli); }},
  };
  int failures = 0;
  for (const auto& item : items) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = item.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (item.limit_seconds > 0.0) o.require(secs < item.limit_seconds, "took " + fmt(secs) + " s");
    std::ostringstream line;
    line << "criterion " << item.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << item.what << "  ["
         << o.detail << "; " << fmt(secs) << " s";
    if (item.limit_seconds > 0.0) line << " of " << fmt(item.limit_seconds) << " s";
    line << "]";
    for (const auto& p : o.problems) line << "\n    " << p;
    std::cout << line.str() << std::endl;
    if (!o.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all acceptance criteria pass" : std::to_string(failures) + " criteria fail")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
