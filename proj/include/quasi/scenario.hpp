#pragma once

// Example builders, random instances, and the fixed check registry every
// report is assembled against.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quasi/quasi_invariance.hpp"
#include "quasi/report.hpp"

namespace quasi {

/// One (state, action) pair ready for the check battery. `functional` always
/// carries the density the cocycles are built from; `state` is set only when
/// that density is a faithful state.
struct Instance {
  std::string label;
  GroupAction action;
  LinearFunctional functional;
  std::optional<FaithfulState> state;
  std::vector<std::vector<std::size_t>> chain;
};

struct ExampleParams {
  std::optional<double> beta;
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<std::size_t> sites;
  /// ex1: a single 3x3 K. ex3: one 2x2 K_0 for every site, or one per site.
  std::vector<Matrix> k;
};

struct ExampleInstance {
  std::string id;
  Json parameters;
  Instance instance;
  /// Example-specific data for the closed-form check.
  Matrix k{};
  /// ex1: density of the flow-invariant reference state omega.
  Matrix reference_density{};
  std::vector<Matrix> site_k{};
  std::vector<double> times{};
  double lambda = 0.0;
  double mu = 0.0;
  double beta = 0.0;
};

/// Throws InvalidParams with an explanation.
ExampleInstance build_example(std::string_view id, const ExampleParams& params,
                              const Tolerance& tol = {});

/// Compares the computed objects with the example's closed forms.
Verdict check_closed_forms(const ExampleInstance& ex, const Tolerance& tol = {});

enum class FuzzFamily { mixed, generic, strongly_quasi, commuting };
std::string_view family_name(FuzzFamily f);
/// Throws InvalidParams.
FuzzFamily parse_family(std::string_view s);

/// The family used by trial `trial` (mixed cycles through the other three).
FuzzFamily family_for_trial(FuzzFamily f, std::size_t trial);

/// Random instance for one trial; the generator is seeded from (seed, trial).
Instance random_instance(Index dim, std::size_t group_order, FuzzFamily family,
                         std::uint64_t seed, std::size_t trial);

/// Parses "cyclic:N". Throws InvalidParams.
std::size_t parse_group_spec(std::string_view spec);

struct InstanceResult {
  std::vector<Verdict> checks;
  Json diagnostics;
};

/// Runs every registered check in registry order. Checks whose hypotheses fail
/// report not-applicable; example.closed_forms is not-applicable here.
InstanceResult run_instance(const Instance& inst, const Tolerance& tol = {});

Report run_example(std::string_view id, const ExampleParams& params, const Tolerance& tol = {});

struct FuzzParams {
  Index dim = 2;
  std::size_t group_order = 2;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  FuzzFamily family = FuzzFamily::mixed;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Throws InvalidParams for dim < 2, trials < 1 or an empty group.
Report fuzz(const FuzzParams& params, const Tolerance& tol = {});

/// The battery on a user-supplied state and action.
Report check_state_action(const FaithfulState& state, const GroupAction& action,
                          const Tolerance& tol = {});

/// Check ids in report order.
const std::vector<std::string>& registered_checks();

struct TraceEntry {
  std::string result;
  std::vector<std::string> check_ids;
};
const std::vector<TraceEntry>& traceability();

/// Results without a check, and traced ids missing from the registry.
struct TraceAudit {
  std::vector<std::string> untraced_results;
  std::vector<std::string> unknown_ids;
  std::vector<std::string> unmapped_checks;
  bool ok() const { return untraced_results.empty() && unknown_ids.empty() && unmapped_checks.empty(); }
};
TraceAudit audit_traceability();

}  // namespace quasi
