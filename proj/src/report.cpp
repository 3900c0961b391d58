#include "quasi/report.hpp"

#include <cstdio>
#include <sstream>

#include "quasi/kernels.hpp"

namespace quasi {

Summary summarize(const Report& r) {
  Summary s;
  for (const auto& v : r.checks) {
    switch (v.status) {
      case Status::holds: ++s.holds; break;
      case Status::fails: ++s.fails; break;
      case Status::not_applicable: ++s.not_applicable; break;
    }
  }
  return s;
}

bool run_passed(const Report& r) { return summarize(r).fails == 0; }

Json report_to_json(const Report& r) {
  Json out;
  out["schema"] = 1;
  out["scenario"] = r.scenario;
  out["parameters"] = r.parameters;
  out["environment"] = {{"tol_abs", r.tol.abs()},
                        {"tol_rel", r.tol.rel()},
                        {"seed", r.seed},
                        {"kernel_backend", std::string(kernels::backend_name(kernels::active_backend()))}};
  Json checks = Json::array();
  for (const auto& v : r.checks) checks.push_back(to_json(v));
  out["checks"] = std::move(checks);
  const Summary s = summarize(r);
  out["summary"] = {{"holds", s.holds}, {"fails", s.fails}, {"not_applicable", s.not_applicable}};
  out["diagnostics"] = r.diagnostics;
  out["traceability"] = r.traceability;
  return out;
}

std::string report_to_text(const Report& r) {
  std::ostringstream os;
  os << "scenario " << r.scenario << "  parameters " << r.parameters.dump() << "\n";
  char buf[64];
  for (const auto& v : r.checks) {
    std::snprintf(buf, sizeof buf, "%.3e", v.max_deviation);
    os << "  " << status_name(v.status);
    for (std::size_t pad = status_name(v.status).size(); pad < 15; ++pad) os << ' ';
    os << v.check_id << "  max_dev=" << buf;
    if (!v.witnesses.empty() && v.status == Status::fails) {
      const auto& w = v.witnesses.front();
      os << "  at";
      if (w.g) os << " g=" << *w.g;
      if (w.t) os << " t=" << *w.t;
      os << " " << w.location;
    }
    if (!v.note.empty()) os << "  (" << v.note << ")";
    os << "\n";
  }
  const Summary s = summarize(r);
  os << "summary: " << s.holds << " hold, " << s.fails << " fail, " << s.not_applicable
     << " not applicable\n";
  return os.str();
}

}  // namespace quasi
