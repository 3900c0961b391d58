#pragma once

// Versioned run reports in JSON and plain text.

#include <cstdint>
#include <string>
#include <vector>

#include "quasi/linalg.hpp"
#include "quasi/verdict.hpp"

namespace quasi {

struct Report {
  std::string scenario;
  Json parameters = Json::object();
  Tolerance tol;
  std::uint64_t seed = 0;
  std::vector<Verdict> checks;
  Json diagnostics = Json::object();
  Json traceability = Json::array();
};

struct Summary {
  std::size_t holds = 0;
  std::size_t fails = 0;
  std::size_t not_applicable = 0;
};

Summary summarize(const Report& r);
/// True when no check fails; not-applicable does not fail a run.
bool run_passed(const Report& r);

Json report_to_json(const Report& r);
std::string report_to_text(const Report& r);

}  // namespace quasi
