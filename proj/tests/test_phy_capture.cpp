#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mmtc/metrics.hpp"
#include "mmtc/phy_capture.hpp"
#include "mmtc/resource_model.hpp"
#include "mmtc/schemes/ostsap.hpp"
#include "support.hpp"

using namespace mmtc;
using namespace mmtc::test_support;

TEST(Capture, SudDecodesOnlySingletons) {
  Rng rng = make_stream(1, "t");
  EXPECT_TRUE(resolve_data_resource(0, true, CaptureModel::sud(), rng).empty());
  EXPECT_EQ(resolve_data_resource(1, false, CaptureModel::sud(), rng), std::vector<int>{0});
  for (int n = 2; n <= 6; ++n) {
    EXPECT_TRUE(resolve_data_resource(n, true, CaptureModel::sud(), rng).empty());
    EXPECT_TRUE(resolve_data_resource(n, false, CaptureModel::sud(), rng).empty());
  }
}

TEST(Capture, Mud2NeedsAtMostTwoDistinctPreambles) {
  Rng rng = make_stream(1, "t");
  CaptureModel m = CaptureModel::mud(2);
  EXPECT_EQ(resolve_data_resource(1, true, m, rng).size(), 1u);
  EXPECT_EQ(resolve_data_resource(2, true, m, rng).size(), 2u);
  EXPECT_TRUE(resolve_data_resource(2, false, m, rng).empty());
  EXPECT_TRUE(resolve_data_resource(3, true, m, rng).empty());
}

TEST(Capture, ParseNames) {
  EXPECT_EQ(CaptureModel::parse("sud").capacity(), 1);
  EXPECT_EQ(CaptureModel::parse("mud2").capacity(), 2);
  EXPECT_EQ(CaptureModel::parse("mud_3").capacity(), 3);
  EXPECT_EQ(CaptureModel::parse("mud").capacity(), 2);
  EXPECT_THROW(CaptureModel::parse("mud0"), std::invalid_argument);
  EXPECT_THROW(CaptureModel::parse("sic"), std::invalid_argument);
}

TEST(Capture, TableFrequenciesMatchProbabilities) {
  Rng rng = make_stream(3, "t");
  CaptureModel m = CaptureModel::table({0.0, 0.9, 0.5, 0.1});
  const int trials = 20000;
  for (int n = 1; n <= 4; ++n) {
    long long decoded = 0;
    for (int i = 0; i < trials; ++i) decoded += static_cast<long long>(resolve_data_resource(n, true, m, rng).size());
    double p = n < 4 ? m.p_of_n[n] : 0.0;
    double mean = p * n * trials, sd = std::sqrt(trials * n * p * (1 - p));
    EXPECT_NEAR(static_cast<double>(decoded), mean, 4 * sd + 1e-9) << "n=" << n;
  }
}

TEST(Detection, RateWithinThreeSigma) {
  Rng rng = make_stream(9, "detect");
  DetectionModel m{0.99, 1e-3};
  const int trials = 100000;
  int hits = 0, false_alarms = 0;
  for (int i = 0; i < trials; ++i) hits += detect_preamble(1, m, rng);
  for (int i = 0; i < trials; ++i) false_alarms += detect_preamble(0, m, rng);
  EXPECT_NEAR(hits, 0.99 * trials, 3 * std::sqrt(trials * 0.99 * 0.01));
  EXPECT_NEAR(false_alarms, 1e-3 * trials, 3 * std::sqrt(trials * 1e-3 * (1 - 1e-3)));
}

TEST(Detection, OrChannelOneDrawPerCall) {
  Rng a = make_stream(4, "d"), b = make_stream(4, "d");
  DetectionModel m{0.7, 0.2};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(detect_preamble(1, m, a), detect_preamble(1 + i % 5, m, b));
  EXPECT_EQ(a(), b());
  Rng c = make_stream(4, "d");
  for (int i = 0; i < 10; ++i) EXPECT_TRUE(detect_preamble(3, DetectionModel::ideal(), c));
}

namespace {

OstsapConfig two_stage(const std::string& plan, CaptureModel capture, DetectionModel det = DetectionModel::ideal()) {
  const PlanPreset& p = find_plan_preset(plan);
  OstsapConfig c;
  c.resources = p.resources;
  c.preambles = *p.preambles;
  c.capture = capture;
  c.detection = det;
  return c;
}

}  // namespace

TEST(Capture, SudIsMudOrderOne) {
  for (bool two : {true, false}) {
    OstsapConfig a = two_stage("ostsap-108", CaptureModel::sud()), b = two_stage("ostsap-108", CaptureModel::mud(1));
    a.two_stage = b.two_stage = two;
    Ostsap sa(a), sb(b);
    EXPECT_TRUE(same_trace(simulate(params(30, 1500, 11), sa), simulate(params(30, 1500, 11), sb)));
  }
}

TEST(Detection, HigherDetectionNeverLowersThroughput) {
  double low = 0, high = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Ostsap lo(two_stage("ostsap-216", CaptureModel::sud(), {0.8, 0.0}));
    Ostsap hi(two_stage("ostsap-216", CaptureModel::sud(), {0.99, 0.0}));
    low += compute_throughput(simulate(params(40, 1500, seed), lo));
    high += compute_throughput(simulate(params(40, 1500, seed), hi));
  }
  EXPECT_GE(high, low);
}

TEST(DecodeTable, LookupAndBounds) {
  SnrDecodeTable t;
  t.set(10, 1, 0.9);
  t.set(10, 2, 0.4);
  EXPECT_EQ(t.probability(10, 1), 0.9);
  EXPECT_EQ(t.probability(10, 3), 0.0);
  EXPECT_EQ(t.probability(10, 0), 0.0);
  EXPECT_EQ(t.max_colliders(10), 2);
  EXPECT_THROW(t.probability(11, 1), std::out_of_range);
  EXPECT_THROW(t.set(10, 0, 0.5), std::invalid_argument);
  EXPECT_THROW(t.set(10, 1, 1.5), std::invalid_argument);
  t.set(10, 3, 0.6);
  EXPECT_EQ(t.validate().size(), 1u);
}

TEST(DecodeTable, CsvRoundTripAndErrors) {
  SnrDecodeTable t = default_craplnc_table();
  std::stringstream ss;
  t.write_csv(ss);
  SnrDecodeTable back = SnrDecodeTable::read_csv(ss);
  for (double s : t.snrs())
    for (int n = 1; n <= 4; ++n) EXPECT_NEAR(back.probability(s, n), t.probability(s, n), 1e-9);
  std::istringstream bad_header("snr,n,p\n");
  EXPECT_THROW(SnrDecodeTable::read_csv(bad_header), std::runtime_error);
  std::istringstream bad_row("snr_db,n_colliders,p_decode\n10,1\n");
  EXPECT_THROW(SnrDecodeTable::read_csv(bad_row), std::runtime_error);
  std::istringstream rising("snr_db,n_colliders,p_decode\n10,1,0.2\n10,2,0.3\n");
  EXPECT_THROW(SnrDecodeTable::read_csv(rising), std::runtime_error);
  std::istringstream empty("");
  EXPECT_THROW(SnrDecodeTable::read_csv(empty), std::runtime_error);
}

TEST(DecodeTable, BuiltinsMonotoneInCollidersAndSnr) {
  for (const SnrDecodeTable& t : {default_craplnc_table(), default_scf_table()}) {
    EXPECT_TRUE(t.validate().empty());
    auto snrs = t.snrs();
    for (std::size_t i = 1; i < snrs.size(); ++i)
      for (int n = 1; n <= t.max_colliders(snrs[i]); ++n)
        EXPECT_GE(t.probability(snrs[i], n), t.probability(snrs[i - 1], n));
  }
  EXPECT_EQ(default_craplnc_table().max_colliders(10), 4);
  EXPECT_EQ(default_scf_table().max_colliders(20), 9);
  EXPECT_NEAR(plnc_decode_probability(10, 1), std::exp(-(std::sqrt(2.0) - 1) / 10), 1e-15);
}

TEST(CfOracle, SingleUserRateIsChannelCapacity) {
  for (double h : {0.3, -1.2, 2.0})
    for (double snr : {1.0, 100.0}) {
      EXPECT_NEAR(cf_computation_rate({h}, {1}, snr), 0.5 * std::log2(1 + snr * h * h), 1e-12);
      EXPECT_NEAR(cf_best_rate({h}, snr), 0.5 * std::log2(1 + snr * h * h), 1e-12);
    }
}

TEST(CfOracle, AlignedChannelMatchesClosedForm) {
  // h = a exactly: |a|^2 - snr |a|^4 / (1 + snr |a|^2) = |a|^2 / (1 + snr |a|^2).
  const std::vector<double> h{1, -2, 3};
  const double snr = 50, aa = 14;
  EXPECT_NEAR(cf_computation_rate(h, {1, -2, 3}, snr), 0.5 * std::log2((1 + snr * aa) / aa), 1e-12);
  EXPECT_GE(cf_best_rate(h, snr) + 1e-12, cf_computation_rate(h, {1, -2, 3}, snr));
}

TEST(CfOracle, RoundingSearchMatchesExhaustiveForSmallN) {
  Rng rng = make_stream(21, "cf-exhaustive");
  std::normal_distribution<double> nd;
  int agree = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    const int n = 2 + t % 2;
    std::vector<double> h(n);
    for (double& v : h) v = nd(rng);
    double best = 0;
    std::vector<int> a(n);
    const int combos = static_cast<int>(std::pow(6, n));
    for (int c = 0; c < combos; ++c) {
      int r = c;
      for (int i = 0; i < n; ++i, r /= 6) a[i] = r % 6 < 3 ? r % 6 - 3 : r % 6 - 2;
      best = std::max(best, cf_computation_rate(h, a, 100));
    }
    double got = cf_best_rate(h, 100);
    EXPECT_LE(got, best + 1e-12);
    agree += (got >= 0.25) == (best >= 0.25);
  }
  EXPECT_GE(agree, trials - 3);
}

TEST(CfOracle, BuiltinScfTableReproducedWithinThreeSigma) {
  const SnrDecodeTable t = default_scf_table();
  const int trials = 1500;
  for (double snr : {10.0, 20.0, 30.0})
    for (int n : {1, 3, 5, 8}) {
      Rng rng = make_stream(99, "cf-recheck/" + std::to_string(snr) + "/" + std::to_string(n));
      const double p = t.probability(snr, n), got = cf_decode_oracle(snr, n, trials, rng);
      EXPECT_NEAR(got, p, 3 * std::sqrt(p * (1 - p) / trials) + 1e-3) << snr << " dB, n=" << n;
    }
}

TEST(DecodeTable, ShippedCsvMatchesBuiltin) {
  for (auto [file, t] : {std::pair{"craplnc.csv", default_craplnc_table()}, std::pair{"scf.csv", default_scf_table()}}) {
    std::ifstream is(std::string(MMTC_SOURCE_DIR) + "/data/decode/" + file);
    ASSERT_TRUE(is) << file;
    SnrDecodeTable shipped = SnrDecodeTable::read_csv(is);
    ASSERT_EQ(shipped.snrs(), t.snrs()) << file;
    for (double s : t.snrs()) {
      ASSERT_EQ(shipped.max_colliders(s), t.max_colliders(s));
      for (int n = 1; n <= t.max_colliders(s); ++n) EXPECT_NEAR(shipped.probability(s, n), t.probability(s, n), 1e-9);
    }
  }
}
