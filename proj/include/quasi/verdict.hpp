#pragma once

// Three-state verdicts for executable theorem checks, and the tracker that
// accumulates the worst deviation across (g, t, element) samples.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quasi/matrix_json.hpp"

namespace quasi {

enum class Status { holds, fails, not_applicable };
enum class Hypothesis { none, satisfied, failed };

std::string_view status_name(Status s);
std::string_view hypothesis_name(Hypothesis h);

struct Witness {
  std::optional<std::size_t> g;
  std::optional<double> t;
  std::string location;
};

struct Verdict {
  std::string check_id;
  Status status = Status::holds;
  double max_deviation = 0.0;
  Hypothesis hypothesis = Hypothesis::none;
  std::vector<Witness> witnesses;
  std::string note;
};

/// Records deviations against per-sample thresholds. The witness kept is the
/// sample with the largest deviation/threshold ratio.
class DeviationTracker {
 public:
  void observe(double deviation, double threshold, Witness where);
  void observe(double deviation, double threshold, std::optional<std::size_t> g,
               std::optional<double> t, std::string location) {
    observe(deviation, threshold, Witness{g, t, std::move(location)});
  }

  /// Folds another tracker in; used to combine per-g partial results.
  void merge(const DeviationTracker& other);

  bool violated() const { return violated_; }
  double max_deviation() const { return max_deviation_; }

  Verdict finish(std::string check_id, Hypothesis h = Hypothesis::none,
                 std::string note = {}) const;

 private:
  double max_deviation_ = 0.0;
  double worst_ratio_ = -1.0;
  bool violated_ = false;
  std::optional<Witness> worst_;
};

/// Observes max |a - b| against tol.threshold(|a|, |b|) (max-entry norms).
void observe_equal(DeviationTracker& tracker, const Matrix& a, const Matrix& b,
                   const Tolerance& tol, Witness where);
void observe_equal(DeviationTracker& tracker, cplx a, cplx b, const Tolerance& tol,
                   Witness where);

/// A boolean verdict with no deviation scale (e.g. a biconditional of predicates).
Verdict boolean_verdict(std::string check_id, bool holds, std::string note = {},
                        Hypothesis h = Hypothesis::none);

Verdict not_applicable(std::string check_id, std::string note,
                       Hypothesis h = Hypothesis::failed);

/// Combines verdicts of the same check from several instances: fails if any
/// fails, holds if any holds, else not-applicable. Keeps the worst witnesses.
Verdict combine(const std::vector<Verdict>& parts);

Json to_json(const Verdict& v);

}  // namespace quasi
