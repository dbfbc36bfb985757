#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "maskguard/calibration.hpp"
#include "maskguard/features.hpp"

using namespace maskguard;

namespace {

Stream ag_stream() {
  LineScenario sc;
  sc.network = default_network();
  sc.duration_s = 0.3;
  sc.fault = FaultSpec{FaultKind::AG, 0.3, 0.001, 0.1, {}};
  return generate_stream(sc);
}

double at(const FeatureVector& f, std::size_t snap, FeatureGroup g, std::size_t ch) {
  return f[feature_index(snap, g, ch)];
}

}  // namespace

TEST(Features, NamesAreUniqueAndComplete) {
  const auto names = feature_names();
  ASSERT_EQ(names.size(), kFeatureCount);
  EXPECT_EQ(kFeatureCount, 108u);
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  EXPECT_EQ(names[feature_index(1, FeatureGroup::ImpedanceMag, 0)], "post_zmag_a");
  EXPECT_EQ(names[feature_index(0, FeatureGroup::VoltageMag, 4)], "pre_vmag_pos");
}

TEST(Features, BalancedSnapshotHasNoZeroOrNegativeSequence) {
  const auto t = solve_healthy(default_network()).terminals;
  const LocalSnapshot snap{t.v1, t.i1};
  const FeatureResult r = extract_features(snap, snap);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t ch : {3u, 5u}) {
      EXPECT_LT(at(r.values, s, FeatureGroup::VoltageMag, ch), 1e-9);
      EXPECT_LT(at(r.values, s, FeatureGroup::CurrentMag, ch), 1e-9);
    }
  }
  // Zero/negative currents sit below the degenerate limit, so their impedances are sentinels.
  EXPECT_EQ(r.degenerate_entries, 4u);
  EXPECT_DOUBLE_EQ(at(r.values, 0, FeatureGroup::ImpedanceMag, 3), kImpedanceSentinel);
  EXPECT_DOUBLE_EQ(at(r.values, 0, FeatureGroup::ImpedanceAngle, 3), 0.0);
}

TEST(Features, AnglesWrappedAndFinite) {
  const Stream s = ag_stream();
  const FeatureResult r = extract_features(s, 150, 17, 16);
  for (double v : r.values) EXPECT_TRUE(std::isfinite(v));
  for (std::size_t snap = 0; snap < 2; ++snap) {
    for (auto g : {FeatureGroup::VoltageAngle, FeatureGroup::CurrentAngle,
                   FeatureGroup::AngleDifference, FeatureGroup::ImpedanceAngle}) {
      for (std::size_t ch = 0; ch < kChannels; ++ch) {
        const double a = at(r.values, snap, g, ch);
        EXPECT_GT(a, -std::numbers::pi - 1e-15);
        EXPECT_LE(a, std::numbers::pi);
      }
    }
  }
  // The pre-trigger positive-sequence voltage is the angle reference.
  EXPECT_NEAR(at(r.values, 0, FeatureGroup::VoltageAngle, 4), 0.0, 1e-12);
}

TEST(Features, FaultedPhaseImpedanceCollapses) {
  const Stream s = ag_stream();
  const FeatureResult r = extract_features(s, 100, 17);
  const double pre = at(r.values, 0, FeatureGroup::ImpedanceMag, 0);
  const double post = at(r.values, 1, FeatureGroup::ImpedanceMag, 0);
  EXPECT_LT(post, pre);
  EXPECT_LT(post, 0.5 * pre);
}

TEST(Features, SnapshotPlacement) {
  const Stream s = ag_stream();
  // Trigger at inception: the one-frame post snapshot is faulted, the pre snapshot healthy.
  const FeatureResult r = extract_features(s, 100, 17);
  const FeatureResult healthy = extract_features(LocalSnapshot{s[83].v1, s[83].i1},
                                                 LocalSnapshot{s[100].v1, s[100].i1});
  EXPECT_EQ(r.values, healthy.values);
  EXPECT_THROW(extract_features(s, 16, 17), std::out_of_range);
  EXPECT_NO_THROW(extract_features(s, 16, 17 - 1));
  EXPECT_THROW(extract_features(s, 40, 17, 30), std::out_of_range);
  EXPECT_THROW(extract_features(s, 295, 17, 16), std::out_of_range);
}

TEST(Features, WindowedSnapshotsAverageFrames) {
  Stream s(4);
  for (std::size_t k = 0; k < 4; ++k) {
    s[k].v1 = ThreePhaseSet::uniform(Phasor(static_cast<double>(k), 1.0));
    s[k].i1 = ThreePhaseSet::uniform(Phasor(2.0, static_cast<double>(k)));
  }
  const LocalSnapshot m = average_snapshot(s, 1, 3);
  EXPECT_EQ(m.v1.a, Phasor(2.0, 1.0));
  EXPECT_EQ(m.i1.c, Phasor(2.0, 2.0));
  EXPECT_THROW(average_snapshot(s, 2, 3), std::out_of_range);
  EXPECT_THROW(average_snapshot(s, 0, 0), std::out_of_range);

  const Stream f = ag_stream();
  const FeatureResult r = extract_features(f, 150, 17, 16);
  const FeatureResult want =
      extract_features(average_snapshot(f, 150 + 1 - 17 - 16, 16), average_snapshot(f, 150, 16));
  EXPECT_EQ(r.values, want.values);
}

TEST(Features, IgnoreRemoteCurrent) {
  Stream s = ag_stream();
  const FeatureResult before = extract_features(s, 150, 17, 16);
  for (auto& fr : s) {
    fr.i2 = ThreePhaseSet::uniform(Phasor(123.0, -4.0));
    fr.i2_true = fr.i2;
  }
  EXPECT_EQ(extract_features(s, 150, 17, 16).values, before.values);
}

TEST(Features, LowCurrentUsesSentinel) {
  const LocalSnapshot snap{ThreePhaseSet::balanced(Phasor(80.0, 0.0)),
                           ThreePhaseSet::balanced(Phasor(0.001, 0.0))};
  const FeatureResult r = extract_features(snap, snap);
  EXPECT_EQ(r.degenerate_entries, 2u * kChannels);
  EXPECT_DOUBLE_EQ(at(r.values, 1, FeatureGroup::ImpedanceMag, 0), kImpedanceSentinel);
  EXPECT_DOUBLE_EQ(at(r.values, 1, FeatureGroup::ImpedanceRe, 4), kImpedanceSentinel);
  EXPECT_DOUBLE_EQ(at(r.values, 1, FeatureGroup::ImpedanceIm, 4), 0.0);
}
