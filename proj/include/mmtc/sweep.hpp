#pragma once

#include <Eigen/Core>
#include <atomic>
#include <boost/version.hpp>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "mmtc/config.hpp"
#include "mmtc/metrics.hpp"

namespace mmtc {

inline constexpr const char* kVersion = "1.0.0";

// Seeds are paired: seed index i uses base_seed + i for every scheme and lambda.
inline std::uint64_t run_seed(const ScenarioConfig& cfg, int seed_index) {
  return cfg.base_seed + static_cast<std::uint64_t>(seed_index);
}

inline SimTrace simulate_point(const ScenarioConfig& cfg, const SchemeSpec& s, double lambda, int seed_index) {
  const std::uint64_t seed = run_seed(cfg, seed_index);
  auto scheme = make_scheme(s, cfg, lambda, seed);
  SimParams p;
  p.traffic = cfg.traffic;
  p.traffic.arrival_rate_lambda = lambda;
  p.arq = cfg.arq;
  p.warmup_ttis = cfg.warmup_ttis;
  p.horizon_ttis = cfg.horizon_ttis;
  p.seed = seed;
  return simulate(p, *scheme);
}

inline TraceSummary run_point(const ScenarioConfig& cfg, const SchemeSpec& s, double lambda, int seed_index) {
  return summarize_trace(simulate_point(cfg, s, lambda, seed_index), cfg.batches);
}

// Rows ordered scheme (config order) then lambda (grid order), independent of `jobs`.
inline std::vector<KpiRow> run_sweep(const ScenarioConfig& cfg, int jobs = 1) {
  const std::size_t nl = cfg.lambdas.size(), ns = static_cast<std::size_t>(cfg.seeds);
  const std::size_t total = cfg.schemes.size() * nl * ns;
  std::vector<TraceSummary> parts(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const std::size_t k = i / (nl * ns), l = (i / ns) % nl, s = i % ns;
      try {
        parts[i] = run_point(cfg, cfg.schemes[k], cfg.lambdas[l], static_cast<int>(s));
      } catch (...) {
        std::lock_guard<std::mutex> g(failure_mu);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<KpiRow> rows;
  for (std::size_t k = 0; k < cfg.schemes.size(); ++k)
    for (std::size_t l = 0; l < nl; ++l) {
      auto first = parts.begin() + static_cast<std::ptrdiff_t>((k * nl + l) * ns);
      std::vector<TraceSummary> point(first, first + static_cast<std::ptrdiff_t>(ns));
      rows.push_back(aggregate(cfg.schemes[k].label, cfg.lambdas[l], point));
    }
  return rows;
}

inline void write_kpi_csv(std::ostream& os, const std::vector<KpiRow>& rows) {
  os << kpi_csv_header() << "\n";
  for (const auto& r : rows) write_kpi_row(os, r);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct ManifestInfo {
  std::string config_source;
  std::vector<std::string> overrides;
  std::string csv_file;
  int jobs = 1;
};

// Key/value text; together with the effective config it reproduces the CSV.
inline void write_manifest(std::ostream& os, const ScenarioConfig& cfg, const ManifestInfo& info) {
  os << "tool=mmtcsim " << kVersion << "\n";
  os << "config_source=" << info.config_source << "\n";
  for (const auto& o : info.overrides) os << "override=" << o << "\n";
  os << "config_hash=fnv1a64:" << hex64(fnv1a(cfg.canonical)) << "\n";
  os << "scenario=" << cfg.name << "\n";
  os << "base_seed=" << cfg.base_seed << "\n";
  os << "seeds=";
  for (int i = 0; i < cfg.seeds; ++i) os << (i ? "," : "") << run_seed(cfg, i);
  os << "\n";
  os << "horizon_ttis=" << cfg.horizon_ttis << "\n";
  os << "warmup_ttis=" << cfg.warmup_ttis << "\n";
  os << "batches=" << cfg.batches << "\n";
  os << "lambdas=";
  for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) os << (i ? "," : "") << csv_number(cfg.lambdas[i]);
  os << "\n";
  os << "schemes=";
  for (std::size_t i = 0; i < cfg.schemes.size(); ++i) os << (i ? "," : "") << cfg.schemes[i].label;
  os << "\n";
  os << "rng=mt19937_64,splitmix64+fnv1a substreams\n";
  os << "jobs=" << info.jobs << "\n";
  os << "csv=" << info.csv_file << "\n";
  os << "compiler=" << __VERSION__ << "\n";
  os << "eigen=" << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
  os << "boost=" << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000 << "." << BOOST_VERSION % 100 << "\n";
}

}  // namespace mmtc
