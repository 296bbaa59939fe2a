#include "tglo/dynamics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

namespace tglo {

std::vector<TraceRecord> attraction_trace(std::span<const SampleLogit> log, const LossSpec& loss,
                                          NonTargetShift form) {
  std::vector<TraceRecord> trace;
  trace.reserve(log.size());
  for (const SampleLogit& s : log) {
    const Eigen::VectorXd y = loss.targets(0, s.n);
    TraceRecord r;
    r.epoch = s.epoch;
    r.sample_id = s.sample_id;
    r.epsilon = 1.0 - s.target_h;
    r.gamma_t = loss.gamma(s.target_h, y(0));
    r.gamma_not_t = loss.gamma(s.mean_nontarget_h, y(1));
    if (r.epsilon <= 0.0 || r.epsilon >= 1.0 || !std::isfinite(r.gamma_t) || !std::isfinite(r.gamma_not_t)) {
      r.boundary = true;
    } else {
      r.strength = entropy_reduction_strength(
          LogitState<double>{r.epsilon, s.n, r.gamma_t, r.gamma_not_t}, form);
      r.boundary = !std::isfinite(r.strength);
      if (r.boundary) r.strength = 0.0;
    }
    trace.push_back(r);
  }
  std::stable_sort(trace.begin(), trace.end(), [](const TraceRecord& a, const TraceRecord& b) {
    return a.epoch != b.epoch ? a.epoch < b.epoch : a.sample_id < b.sample_id;
  });
  return trace;
}

void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace) {
  os << "epoch,sample_id,gamma_t,gamma_not_t,epsilon,strength\n";
  char buf[160];
  for (const TraceRecord& r : trace) {
    if (r.boundary) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g,%.9g,nan\n", r.epoch, r.sample_id, r.gamma_t,
                    r.gamma_not_t, r.epsilon);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.sample_id, r.gamma_t,
                    r.gamma_not_t, r.epsilon, r.strength);
    }
    os << buf;
  }
}

std::vector<EpochSignSummary> summarize_trace(std::span<const TraceRecord> trace) {
  std::map<int, EpochSignSummary> by_epoch;
  for (const TraceRecord& r : trace) {
    EpochSignSummary& s = by_epoch[r.epoch];
    s.epoch = r.epoch;
    ++s.records;
    if (r.boundary) ++s.boundary;
    else if (r.strength > 0) ++s.positive;
    else if (r.strength < 0) ++s.negative;
    else ++s.zero;
  }
  std::vector<EpochSignSummary> out;
  out.reserve(by_epoch.size());
  for (auto& [epoch, s] : by_epoch) out.push_back(s);
  return out;
}

}  // namespace tglo
