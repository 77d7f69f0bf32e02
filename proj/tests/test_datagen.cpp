#include <gtest/gtest.h>

#include "rotorprog/datagen.hpp"

using namespace rotorprog;

namespace {

FleetConfig small_fleet(std::uint64_t seed) {
  FleetConfig c;
  c.n_faulty = 2;
  c.n_healthy = 1;
  c.faulty_counts = {12, 8, 8};
  c.healthy_waves = 10;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Datagen, SameSeedBitIdentical) {
  const auto a = generate_fleet(small_fleet(3)), b = generate_fleet(small_fleet(3));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t m = 0; m < a.size(); ++m) {
    EXPECT_EQ(a[m].timeline.timestamps, b[m].timeline.timestamps);
    for (std::size_t w = 0; w < a[m].waves.size(); ++w)
      for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(a[m].waves[w][s].samples, b[m].waves[w][s].samples);
  }
}

TEST(Datagen, DistinctSeedsDistinctValuesSameSchema) {
  const auto a = generate_fleet(small_fleet(1)), b = generate_fleet(small_fleet(2));
  EXPECT_EQ(a[0].timeline.timestamps, b[0].timeline.timestamps);
  EXPECT_EQ(a[0].labels, b[0].labels);
  EXPECT_NE(a[0].waves[0][0].samples, b[0].waves[0][0].samples);
}

TEST(Datagen, HealthyMachineIsAllNormal) {
  const auto fleet = generate_fleet(small_fleet(0));
  const auto& h = fleet[2];
  EXPECT_FALSE(h.timeline.faulty());
  for (int y : h.labels) EXPECT_EQ(y, kNormal);
  EXPECT_EQ(h.waves.size(), 10u);
}

TEST(Datagen, FaultyLabelsFollowTimeline) {
  const auto fleet = generate_fleet(small_fleet(0));
  const auto& m = fleet[0];
  ASSERT_TRUE(m.timeline.failure_time);
  EXPECT_EQ(m.labels, truth_for({12, 8, 8}));
  for (std::size_t i = 0; i < m.labels.size(); ++i)
    EXPECT_EQ(m.labels[i], label_at(m.timeline.timestamps[i], m.timeline.failure_time));
}

TEST(Datagen, DefaultNormalShare) {
  FleetConfig c;
  c.n_faulty = 5;
  c.n_healthy = 5;
  const double normal = 5.0 * double(c.faulty_counts.normal) + 5.0 * double(c.healthy_waves);
  const double total = normal + 5.0 * double(c.faulty_counts.risky + c.faulty_counts.high_risk);
  EXPECT_GE(normal / total, 0.6);
  EXPECT_LE(normal / total, 0.8);
}

TEST(Datagen, PerIntervalOrderingAtFleetLevel) {
  FleetConfig c;
  c.seed = 5;
  const auto fleet = generate_fleet(c);
  for (std::size_t s = 0; s < 6; ++s) {
    std::array<double, 3> peak{}, ss{};
    std::array<std::size_t, 3> n{};
    std::array<std::vector<double>, 3> bins;
    for (const auto& m : fleet)
      for (std::size_t w = 0; w < m.waves.size(); ++w) {
        const auto k = std::size_t(m.labels[w]);
        for (double v : m.waves[w][s].samples) {
          peak[k] = std::max(peak[k], std::abs(v));
          ss[k] += v * v;
          ++n[k];
        }
        bins[k].push_back(double(dominant_bin(fft_spectrum(m.waves[w][s]))));
      }
    for (std::size_t k = 0; k < 3; ++k) {
      const double sd = std::sqrt(ss[k] / double(n[k]));
      EXPECT_NEAR(sd / c.profile.target_std[s][k], 1.0, 0.15) << "sensor " << s + 1 << " interval " << k;
      std::sort(bins[k].begin(), bins[k].end());
    }
    EXPECT_LT(peak[0], peak[1]) << "sensor " << s + 1;
    EXPECT_LT(peak[1], peak[2]) << "sensor " << s + 1;
    EXPECT_GT(bins[0][bins[0].size() / 2], bins[1][bins[1].size() / 2]);
    EXPECT_GT(bins[1][bins[1].size() / 2], bins[2][bins[2].size() / 2]);
  }
}

TEST(Datagen, ProfileValidation) {
  auto p = DegradationProfile::standard();
  p.base_bin = {10, 20, 30};
  EXPECT_THROW(p.validate(), Error);
  p = DegradationProfile::standard();
  p.wave_length = 100;
  EXPECT_THROW(p.validate(), Error);
  p = DegradationProfile::standard();
  p.target_std[0] = {3.0, 2.0, 4.0};
  EXPECT_THROW(p.validate(), Error);
}

TEST(Datagen, NoFaultyMachinesGiveOnlyNormalRows) {
  FleetConfig c = small_fleet(0);
  c.n_faulty = 0;
  c.n_healthy = 2;
  const auto fleet = generate_fleet(c);
  FeatureTable all;
  for (const auto& m : fleet) append(all, featurize_machine(m));
  EXPECT_EQ(distinct_labels(all.labels), std::vector<int>{0});
}

TEST(Datagen, FeaturizeRecordsSelfReadsOnly) {
  const auto fleet = generate_fleet(small_fleet(0));
  PipelineAudit audit;
  const auto t = featurize_machine(fleet[0], &audit);
  EXPECT_EQ(t.size(), 28u);
  EXPECT_EQ(t.width(), 144u);
  std::set<std::string> keys;
  for (const auto& r : t.rows) keys.insert(r.key());
  EXPECT_EQ(audit.reads(audit_stage::denoise), 28u);
  EXPECT_EQ(audit.foreign_reads(audit_stage::denoise, keys), 0u);
}
