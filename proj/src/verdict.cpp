#include "quasi/verdict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quasi/errors.hpp"

namespace quasi {

std::string_view status_name(Status s) {
  switch (s) {
    case Status::holds:
      return "holds";
    case Status::fails:
      return "fails";
    case Status::not_applicable:
      return "not-applicable";
  }
  return "unknown";
}

std::string_view hypothesis_name(Hypothesis h) {
  switch (h) {
    case Hypothesis::none:
      return "none";
    case Hypothesis::satisfied:
      return "satisfied";
    case Hypothesis::failed:
      return "failed";
  }
  return "unknown";
}

void DeviationTracker::observe(double deviation, double threshold, Witness where) {
  // NaN must count as a violation, never slip through a comparison.
  const bool bad = !std::isfinite(deviation) || !(deviation <= threshold);
  max_deviation_ = std::isnan(deviation) ? deviation : std::max(max_deviation_, deviation);
  violated_ = violated_ || bad;
  const double ratio = std::isnan(deviation) ? std::numeric_limits<double>::infinity()
                                             : deviation / threshold;
  if (ratio > worst_ratio_) {
    worst_ratio_ = ratio;
    worst_ = std::move(where);
  }
}

void DeviationTracker::merge(const DeviationTracker& other) {
  if (std::isnan(other.max_deviation_) || other.max_deviation_ > max_deviation_) {
    max_deviation_ = other.max_deviation_;
  }
  violated_ = violated_ || other.violated_;
  if (other.worst_ && other.worst_ratio_ > worst_ratio_) {
    worst_ratio_ = other.worst_ratio_;
    worst_ = other.worst_;
  }
}

Verdict DeviationTracker::finish(std::string check_id, Hypothesis h, std::string note) const {
  Verdict v;
  v.check_id = std::move(check_id);
  v.status = violated_ ? Status::fails : Status::holds;
  v.max_deviation = max_deviation_;
  v.hypothesis = h;
  if (worst_) v.witnesses.push_back(*worst_);
  v.note = std::move(note);
  return v;
}

void observe_equal(DeviationTracker& tracker, const Matrix& a, const Matrix& b,
                   const Tolerance& tol, Witness where) {
  const auto cmp = approx_equal(a, b, tol);
  tracker.observe(cmp.deviation, cmp.threshold, std::move(where));
}

void observe_equal(DeviationTracker& tracker, cplx a, cplx b, const Tolerance& tol,
                   Witness where) {
  tracker.observe(std::abs(a - b), tol.threshold(std::abs(a), std::abs(b)), std::move(where));
}

Verdict boolean_verdict(std::string check_id, bool holds, std::string note, Hypothesis h) {
  Verdict v;
  v.check_id = std::move(check_id);
  v.status = holds ? Status::holds : Status::fails;
  v.hypothesis = h;
  v.note = std::move(note);
  return v;
}

Verdict not_applicable(std::string check_id, std::string note, Hypothesis h) {
  Verdict v;
  v.check_id = std::move(check_id);
  v.status = Status::not_applicable;
  v.hypothesis = h;
  v.note = std::move(note);
  return v;
}

Verdict combine(const std::vector<Verdict>& parts) {
  if (parts.empty()) throw InvalidParams("combine: no verdicts");
  Verdict out;
  out.check_id = parts.front().check_id;
  out.status = Status::not_applicable;
  out.hypothesis = parts.front().hypothesis;
  bool any_fail = false;
  bool any_hold = false;
  bool any_hyp_ok = false;
  bool any_hyp_failed = false;
  for (const auto& p : parts) {
    if (p.check_id != out.check_id) throw InvalidParams("combine: mixed check ids");
    any_fail = any_fail || p.status == Status::fails;
    any_hold = any_hold || p.status == Status::holds;
    any_hyp_ok = any_hyp_ok || p.hypothesis == Hypothesis::satisfied;
    any_hyp_failed = any_hyp_failed || p.hypothesis == Hypothesis::failed;
    if (p.status != Status::not_applicable && p.max_deviation >= out.max_deviation) {
      out.max_deviation = p.max_deviation;
      if (!any_fail || p.status == Status::fails) out.witnesses = p.witnesses;
    }
  }
  if (any_fail) {
    // Prefer the witness of the worst failing part.
    double worst = -1.0;
    for (const auto& p : parts) {
      if (p.status == Status::fails && p.max_deviation > worst) {
        worst = p.max_deviation;
        out.witnesses = p.witnesses;
        out.note = p.note;
      }
    }
  }
  out.status = any_fail ? Status::fails : (any_hold ? Status::holds : Status::not_applicable);
  if (any_hyp_ok) {
    out.hypothesis = Hypothesis::satisfied;
  } else if (any_hyp_failed) {
    out.hypothesis = Hypothesis::failed;
  }
  if (out.status == Status::not_applicable) out.note = parts.front().note;
  return out;
}

Json to_json(const Verdict& v) {
  Json j;
  j["check_id"] = v.check_id;
  j["status"] = status_name(v.status);
  j["max_deviation"] = v.max_deviation;
  j["hypothesis_status"] = hypothesis_name(v.hypothesis);
  Json ws = Json::array();
  for (const auto& w : v.witnesses) {
    Json wj;
    wj["g"] = w.g ? Json(*w.g) : Json(nullptr);
    wj["t"] = w.t ? Json(*w.t) : Json(nullptr);
    wj["location"] = w.location;
    ws.push_back(std::move(wj));
  }
  j["witnesses"] = std::move(ws);
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

}  // namespace quasi
