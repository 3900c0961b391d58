// quasilab: run the example scenarios, fuzz random instances, or check a
// user-supplied state and action. Exit 0 iff no check fails, 1 if one does,
// 2 on bad input.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "quasi/errors.hpp"
#include "quasi/group.hpp"
#include "quasi/matrix_json.hpp"
#include "quasi/scenario.hpp"

namespace {

using namespace quasi;

std::vector<Matrix> read_matrices(const std::string& path) {
  const Json j = read_json_file(path);
  if (j.is_array()) return matrices_from_json(j);
  return {matrix_from_json(j)};
}

/// Either a bare list of unitaries (cyclic group of that order, element k
/// implemented by the k-th matrix) or {"table": [[...]], "unitaries": [...]}.
GroupAction read_action(const std::string& path, const Tolerance& tol) {
  const Json j = read_json_file(path);
  if (j.is_array()) {
    const auto us = matrices_from_json(j);
    return GroupAction(cyclic_group(us.size()), us, tol);
  }
  if (!j.is_object() || !j.contains("table") || !j.contains("unitaries")) {
    throw ParseError("action file needs a list of unitaries or {\"table\", \"unitaries\"}");
  }
  GroupTable table;
  try {
    table = j.at("table").get<GroupTable>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad group table: ") + e.what());
  }
  return GroupAction(FiniteGroup(std::move(table)), matrices_from_json(j.at("unitaries")), tol);
}

int emit(const Report& r, const std::string& format) {
  if (format == "text") {
    std::cout << report_to_text(r);
  } else {
    std::cout << report_to_json(r).dump(2) << "\n";
  }
  return run_passed(r) ? 0 : 1;
}

int selftest() {
  const auto audit = audit_traceability();
  for (const auto& r : audit.untraced_results) std::cout << "untraced result: " << r << "\n";
  for (const auto& id : audit.unknown_ids) std::cout << "traced id not registered: " << id << "\n";
  for (const auto& id : audit.unmapped_checks) std::cout << "check without a result: " << id << "\n";
  // Every report carries each registered check exactly once.
  const Report r = run_example("ex4", {}, Tolerance());
  bool complete = r.checks.size() == registered_checks().size();
  for (std::size_t k = 0; complete && k < r.checks.size(); ++k) {
    complete = r.checks[k].check_id == registered_checks()[k];
  }
  if (!complete) std::cout << "report does not list the registered checks in order\n";
  const bool ok = audit.ok() && complete;
  std::cout << "selftest " << (ok ? "passed" : "FAILED") << ": " << traceability().size()
            << " results, " << registered_checks().size() << " checks\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-invariant states on matrix algebras: example runner, fuzzer and checker"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "json";
  double tol_abs = 1e-9;
  double tol_rel = 1e-9;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--tol-abs", tol_abs, "Absolute tolerance");
  app.add_option("--tol-rel", tol_rel, "Relative tolerance");

  auto* verify = app.add_subcommand("verify", "Run an example scenario");
  std::string example;
  std::optional<double> beta, lambda, mu;
  std::optional<std::size_t> sites;
  std::string k_file;
  verify->add_option("--example", example, "ex1, ex2, ex3 or ex4")
      ->required()
      ->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4"}));
  verify->add_option("--beta", beta, "ex2 inverse temperature");
  verify->add_option("--lambda", lambda, "ex2 or ex4 weight");
  verify->add_option("--mu", mu, "ex4 second weight");
  verify->add_option("--sites", sites, "ex3 ring length");
  verify->add_option("--k-file", k_file, "K (ex1) or K_i (ex3) as matrix JSON")->check(CLI::ExistingFile);

  auto* fuzz_cmd = app.add_subcommand("fuzz", "Run the checks on random instances");
  FuzzParams fp;
  std::string group = "cyclic:2";
  std::string family = "mixed";
  long dim = 2;
  fuzz_cmd->add_option("--dim", dim, "Matrix dimension")->required();
  fuzz_cmd->add_option("--group", group, "Group spec, cyclic:N")->required();
  fuzz_cmd->add_option("--trials", fp.trials, "Number of trials")->required();
  fuzz_cmd->add_option("--seed", fp.seed, "Seed")->required();
  fuzz_cmd->add_option("--family", family, "mixed, generic, strongly_quasi or commuting");
  fuzz_cmd->add_option("--threads", fp.threads, "Worker threads (0 = all cores)");

  auto* check = app.add_subcommand("check", "Run the checks on a given state and action");
  std::string state_file, action_file;
  check->add_option("--state", state_file, "Density matrix JSON")->required()->check(CLI::ExistingFile);
  check->add_option("--action", action_file, "Action JSON")->required()->check(CLI::ExistingFile);

  auto* self = app.add_subcommand("selftest", "Audit the check registry and traceability map");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every other usage error is an input error
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Tolerance tol(tol_abs, tol_rel);
    if (*verify) {
      ExampleParams params{beta, lambda, mu, sites, {}};
      if (!k_file.empty()) params.k = read_matrices(k_file);
      return emit(run_example(example, params, tol), format);
    }
    if (*fuzz_cmd) {
      fp.dim = dim;
      fp.group_order = parse_group_spec(group);
      fp.family = parse_family(family);
      return emit(fuzz(fp, tol), format);
    }
    if (*check) {
      const FaithfulState state(matrix_from_json(read_json_file(state_file)), tol);
      return emit(check_state_action(state, read_action(action_file, tol), tol), format);
    }
    if (*self) return selftest();
  } catch (const quasi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
