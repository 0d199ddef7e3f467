#pragma once

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmtc/sim_core.hpp"

namespace mmtc {

// Measurement window: receptions in [warmup, warmup + horizon).
inline double compute_throughput(const SimTrace& trace) {
  if (trace.horizon_ttis() <= 0) throw std::invalid_argument("compute_throughput: empty trace");
  long long ok = 0;
  for (Tti t = trace.warmup_ttis; t < trace.total_ttis(); ++t) ok += trace.ttis[static_cast<std::size_t>(t)].successes;
  return static_cast<double>(ok) / static_cast<double>(trace.horizon_ttis());
}

inline bool in_window(const SimTrace& trace, Tti reception) {
  return reception >= trace.warmup_ttis && reception < trace.total_ttis();
}

// Latency samples in TTIs (T2 - T1) of successes received in the window.
inline std::vector<double> latency_samples_ttis(const SimTrace& trace) {
  std::vector<double> v;
  for (const Device& d : trace.devices)
    if (d.completion_tti && in_window(trace, *d.completion_tti - 1))
      v.push_back(static_cast<double>(*d.completion_tti - d.arrival_tti));
  return v;
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

struct LatencySummary {
  std::size_t count = 0;
  double mean_ttis = std::numeric_limits<double>::quiet_NaN();
  double p50_ttis = std::numeric_limits<double>::quiet_NaN();
  double p95_ttis = std::numeric_limits<double>::quiet_NaN();
  double min_ttis = std::numeric_limits<double>::quiet_NaN();
  double offset_ms = 0.5;

  bool empty() const { return count == 0; }
  double mean_ms() const { return mean_ttis + offset_ms; }
  double p50_ms() const { return p50_ttis + offset_ms; }
  double p95_ms() const { return p95_ttis + offset_ms; }
  double min_ms() const { return min_ttis + offset_ms; }
};

inline LatencySummary summarize_latency(std::vector<double> ttis, double offset_ms) {
  LatencySummary s;
  s.offset_ms = offset_ms;
  s.count = ttis.size();
  if (ttis.empty()) return s;
  std::sort(ttis.begin(), ttis.end());
  double sum = 0;
  for (double v : ttis) sum += v;
  s.mean_ttis = sum / static_cast<double>(ttis.size());
  s.p50_ttis = quantile_sorted(ttis, 0.50);
  s.p95_ttis = quantile_sorted(ttis, 0.95);
  s.min_ttis = ttis.front();
  return s;
}

inline LatencySummary compute_latency(const SimTrace& trace) {
  return summarize_latency(latency_samples_ttis(trace), trace.waiting_offset_ms);
}

struct MeanCi {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double half_width = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

// Student-t 95% interval over independent batch means.
inline MeanCi mean_ci(const std::vector<double>& xs, double level = 0.95) {
  MeanCi r;
  r.n = xs.size();
  if (xs.empty()) return r;
  double sum = 0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) {
    r.half_width = 0.0;
    return r;
  }
  double ss = 0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  boost::math::students_t dist(static_cast<double>(xs.size() - 1));
  double t = boost::math::quantile(dist, 0.5 + level / 2.0);
  r.half_width = t * sd / std::sqrt(static_cast<double>(xs.size()));
  return r;
}

struct KpiRow {
  std::string scheme;
  double lambda = 0.0;
  int seed_count = 0;
  double throughput_mean = 0.0;
  double throughput_ci = 0.0;
  LatencySummary latency;
  double latency_ci = std::numeric_limits<double>::quiet_NaN();
  double drop_rate = 0.0;
  long long pending = 0;
  long long successes = 0;
};

// Per-trace reduction; the window is cut into `batches` contiguous batches.
struct TraceSummary {
  std::vector<double> throughput_batches;
  std::vector<double> latency_batches;  // batch mean latency, empty batches omitted
  std::vector<double> latencies;        // TTIs
  long long pending = 0;
  long long drops = 0;
  long long successes = 0;
  double offset_ms = 0.5;
};

inline TraceSummary summarize_trace(const SimTrace& tr, int batches = 20) {
  if (batches < 1) throw std::invalid_argument("summarize_trace: batches must be >= 1");
  const Tti H = tr.horizon_ttis();
  if (H < batches) throw std::invalid_argument("summarize_trace: horizon shorter than batch count");
  TraceSummary s;
  s.offset_ms = tr.waiting_offset_ms;
  std::vector<double> lat_sum(batches, 0.0);
  std::vector<long long> lat_n(batches, 0);
  for (const Device& d : tr.devices) {
    if (d.completion_tti && in_window(tr, *d.completion_tti - 1)) {
      int b = static_cast<int>(((*d.completion_tti - 1 - tr.warmup_ttis) * batches) / H);
      double l = static_cast<double>(*d.completion_tti - d.arrival_tti);
      lat_sum[b] += l;
      ++lat_n[b];
      s.latencies.push_back(l);
    }
    if (d.state != DeviceState::Succeeded && d.state != DeviceState::Dropped) ++s.pending;
    if (d.state == DeviceState::Dropped && in_window(tr, d.drop_tti)) ++s.drops;
  }
  for (int b = 0; b < batches; ++b) {
    Tti lo = tr.warmup_ttis + (H * b) / batches, hi = tr.warmup_ttis + (H * (b + 1)) / batches;
    long long ok = 0;
    for (Tti t = lo; t < hi; ++t) ok += tr.ttis[static_cast<std::size_t>(t)].successes;
    s.successes += ok;
    s.throughput_batches.push_back(static_cast<double>(ok) / static_cast<double>(hi - lo));
    if (lat_n[b] > 0) s.latency_batches.push_back(lat_sum[b] / static_cast<double>(lat_n[b]));
  }
  return s;
}

inline KpiRow aggregate(const std::string& scheme, double lambda, const std::vector<TraceSummary>& parts) {
  if (parts.empty()) throw std::invalid_argument("aggregate: no traces");
  KpiRow row;
  row.scheme = scheme;
  row.lambda = lambda;
  row.seed_count = static_cast<int>(parts.size());
  std::vector<double> thr, lat, all;
  long long drops = 0;
  for (const TraceSummary& s : parts) {
    thr.insert(thr.end(), s.throughput_batches.begin(), s.throughput_batches.end());
    lat.insert(lat.end(), s.latency_batches.begin(), s.latency_batches.end());
    all.insert(all.end(), s.latencies.begin(), s.latencies.end());
    row.pending += s.pending;
    row.successes += s.successes;
    drops += s.drops;
  }
  MeanCi t = mean_ci(thr);
  row.throughput_mean = t.mean;
  row.throughput_ci = t.half_width;
  row.latency = summarize_latency(std::move(all), parts.front().offset_ms);
  if (!lat.empty()) row.latency_ci = mean_ci(lat).half_width;
  row.drop_rate = row.successes + drops > 0 ? static_cast<double>(drops) / static_cast<double>(row.successes + drops) : 0.0;
  return row;
}

inline KpiRow aggregate(const std::string& scheme, double lambda, const std::vector<SimTrace>& traces,
                        int batches = 20) {
  std::vector<TraceSummary> parts;
  for (const SimTrace& tr : traces) parts.push_back(summarize_trace(tr, batches));
  return aggregate(scheme, lambda, parts);
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline const char* kpi_csv_header() {
  return "scheme,lambda,seed_count,throughput_mean,throughput_ci,latency_mean_ms,latency_p50_ms,latency_p95_ms,"
         "latency_ci,drop_rate,pending,latency_mean_tti,latency_p50_tti,latency_p95_tti";
}

inline void write_kpi_row(std::ostream& os, const KpiRow& r) {
  const LatencySummary& l = r.latency;
  os << r.scheme << "," << csv_number(r.lambda) << "," << r.seed_count << "," << csv_number(r.throughput_mean) << ","
     << csv_number(r.throughput_ci) << "," << csv_number(l.mean_ms()) << "," << csv_number(l.p50_ms()) << ","
     << csv_number(l.p95_ms()) << "," << csv_number(r.latency_ci) << "," << csv_number(r.drop_rate) << ","
     << r.pending << "," << csv_number(l.mean_ttis) << "," << csv_number(l.p50_ttis) << ","
     << csv_number(l.p95_ttis) << "\n";
}

}  // namespace mmtc
