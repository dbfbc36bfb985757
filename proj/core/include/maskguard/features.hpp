#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "maskguard/scenario.hpp"

namespace maskguard {

inline constexpr std::size_t kGroups = 9;
inline constexpr std::size_t kChannels = 6;  // a, b, c, zero, positive, negative
inline constexpr std::size_t kSnapshotFeatures = kGroups * kChannels;
inline constexpr std::size_t kFeatureCount = 2 * kSnapshotFeatures;

inline constexpr double kDegenerateCurrentKa = 0.02;
inline constexpr double kImpedanceSentinel = 1e4;  // ohm

enum class FeatureGroup : std::size_t {
  VoltageMag,
  CurrentMag,
  VoltageAngle,
  CurrentAngle,
  AngleDifference,
  ImpedanceMag,
  ImpedanceAngle,
  ImpedanceRe,
  ImpedanceIm,
};

using FeatureVector = std::array<double, kFeatureCount>;

// What the ZCC may see: local quantities only.
struct LocalSnapshot {
  ThreePhaseSet v1, i1;
};

struct FeatureResult {
  FeatureVector values{};
  std::size_t degenerate_entries = 0;  // impedance channels replaced by the sentinel
};

// snapshot: 0 = pre-trigger, 1 = post-trigger.
std::size_t feature_index(std::size_t snapshot, FeatureGroup group, std::size_t channel);
std::vector<std::string> feature_names();

FeatureResult extract_features(const LocalSnapshot& pre, const LocalSnapshot& post);
// Mean of the local channels over frames [first, first + count).
LocalSnapshot average_snapshot(const Stream& stream, std::size_t first, std::size_t count);
// The pre-snapshot ends one power cycle (`cycle_samples`) before the trigger frame and the
// post-snapshot starts at it; each averages `window` frames.
FeatureResult extract_features(const Stream& stream, std::size_t trigger_index,
                               std::size_t cycle_samples, std::size_t window = 1);

}  // namespace maskguard
