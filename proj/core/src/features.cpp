#include "maskguard/features.hpp"

#include <stdexcept>

namespace maskguard {

namespace {

constexpr std::array<const char*, kGroups> kGroupNames = {
    "vmag", "imag", "vang", "iang", "vi_ang", "zmag", "zang", "zre", "zim"};
constexpr std::array<const char*, kChannels> kChannelNames = {"a", "b", "c", "zero", "pos", "neg"};

std::array<Phasor, kChannels> channels(const ThreePhaseSet& abc) {
  const SequenceSet s = to_sequence(abc);
  return {abc.a, abc.b, abc.c, s.zero, s.positive, s.negative};
}

std::size_t fill_snapshot(const LocalSnapshot& snap, Complex rot, std::size_t snapshot,
                          FeatureVector& out) {
  const auto v = channels(snap.v1 * rot);
  const auto i = channels(snap.i1 * rot);
  std::size_t degenerate = 0;
  auto put = [&](FeatureGroup g, std::size_t ch, double value) {
    out[feature_index(snapshot, g, ch)] = value;
  };
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    put(FeatureGroup::VoltageMag, ch, v[ch].magnitude());
    put(FeatureGroup::CurrentMag, ch, i[ch].magnitude());
    put(FeatureGroup::VoltageAngle, ch, v[ch].angle());
    put(FeatureGroup::CurrentAngle, ch, i[ch].angle());
    put(FeatureGroup::AngleDifference, ch, wrap_angle(v[ch].angle() - i[ch].angle()));
    Complex z(kImpedanceSentinel, 0.0);
    if (i[ch].magnitude() < kDegenerateCurrentKa) {
      ++degenerate;
    } else {
      z = v[ch] / i[ch];
    }
    const Phasor zp(z);
    put(FeatureGroup::ImpedanceMag, ch, zp.magnitude());
    put(FeatureGroup::ImpedanceAngle, ch, zp.angle());
    put(FeatureGroup::ImpedanceRe, ch, z.real());
    put(FeatureGroup::ImpedanceIm, ch, z.imag());
  }
  return degenerate;
}

}  // namespace

std::size_t feature_index(std::size_t snapshot, FeatureGroup group, std::size_t channel) {
  return snapshot * kSnapshotFeatures + static_cast<std::size_t>(group) * kChannels + channel;
}

std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  names.reserve(kFeatureCount);
  for (const char* snap : {"pre", "post"}) {
    for (const char* g : kGroupNames) {
      for (const char* ch : kChannelNames) {
        names.push_back(std::string(snap) + "_" + g + "_" + ch);
      }
    }
  }
  return names;
}

FeatureResult extract_features(const LocalSnapshot& pre, const LocalSnapshot& post) {
  // Angles are referenced to the pre-trigger positive-sequence voltage.
  const Phasor ref = to_sequence(pre.v1).positive;
  const Complex rot = ref.magnitude() > 0.0 ? std::polar(1.0, -ref.angle()) : Complex(1.0, 0.0);
  FeatureResult r;
  r.degenerate_entries = fill_snapshot(pre, rot, 0, r.values);
  r.degenerate_entries += fill_snapshot(post, rot, 1, r.values);
  return r;
}

LocalSnapshot average_snapshot(const Stream& stream, std::size_t first, std::size_t count) {
  if (count == 0 || first + count > stream.size()) {
    throw std::out_of_range("snapshot window runs past the stream");
  }
  LocalSnapshot snap;
  for (std::size_t k = first; k < first + count; ++k) {
    snap.v1 += stream[k].v1;
    snap.i1 += stream[k].i1;
  }
  const double inv = 1.0 / static_cast<double>(count);
  snap.v1 *= inv;
  snap.i1 *= inv;
  return snap;
}

FeatureResult extract_features(const Stream& stream, std::size_t trigger_index,
                               std::size_t cycle_samples, std::size_t window) {
  if (window == 0 || trigger_index + 1 < cycle_samples + window ||
      trigger_index + window > stream.size()) {
    throw std::out_of_range("trigger index leaves no room for the snapshots");
  }
  const std::size_t pre_first = trigger_index + 1 - cycle_samples - window;
  return extract_features(average_snapshot(stream, pre_first, window),
                          average_snapshot(stream, trigger_index, window));
}

}  // namespace maskguard
