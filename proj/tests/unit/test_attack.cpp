#include <gtest/gtest.h>

#include <cmath>

#include "maskguard/attack.hpp"
#include "maskguard/calibration.hpp"
#include "maskguard/error.hpp"
#include "maskguard/evaluation.hpp"
#include "maskguard/mismatch_index.hpp"
#include "maskguard/relay.hpp"

using namespace maskguard;

namespace {

Stream one_frame(ThreePhaseSet i1, ThreePhaseSet i2 = {}) {
  MeasurementFrame fr;
  fr.i1 = i1;
  fr.i2 = i2;
  fr.i2_true = i2;
  return {fr};
}

LineScenario faulted(FaultKind kind, double x, double r_f, double duration = 0.3) {
  LineScenario sc;
  sc.network = default_network();
  sc.duration_s = duration;
  sc.fault = FaultSpec{kind, x, r_f, 0.1, {}};
  return sc;
}

}  // namespace

TEST(BasicFma, NegatesLocalCurrent) {
  const Stream s = apply_fma(one_frame(ThreePhaseSet::uniform(Phasor::polar_deg(2, -30))), {}, 0.0);
  EXPECT_LT((s[0].i2.a - Phasor::polar_deg(2, 150)).magnitude(), 1e-12);
  EXPECT_TRUE(s[0].flags.attacked);
}

TEST(BasicFma, DeliveredDifferentialEqualsOffset) {
  const Network net = default_network();
  const Phasor idn = healthy_differential(net);
  const Stream clean = generate_stream(faulted(FaultKind::AG, 0.1, 0.001));
  const AttackSpec atk = healthy_masking_attack(net, 0.1);
  const Stream s = apply_attack(clean, atk, net.line);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k].t < 0.1 - 1e-12) {
      EXPECT_EQ(s[k].i2, clean[k].i2);
      EXPECT_FALSE(s[k].flags.attacked);
      continue;
    }
    const ThreePhaseSet id = s[k].i1 + s[k].i2;
    const ThreePhaseSet want = ThreePhaseSet::balanced(idn);
    for (std::size_t p = 0; p < 3; ++p) EXPECT_LT((id[p] - want[p]).magnitude(), 1e-12);
    EXPECT_EQ(s[k].i2_true, clean[k].i2_true);
    EXPECT_EQ(s[k].v1, clean[k].v1);
    EXPECT_EQ(s[k].i1, clean[k].i1);
  }
}

TEST(BasicFma, MasksInternalFaults) {
  const Network net = default_network();
  const RelaySettings relay;
  for (FaultKind kind : kAllFaultKinds) {
    for (double x : {0.1, 0.5, 0.9}) {
      for (double r_f : {0.001, 50.0, 300.0}) {
        const Stream clean = generate_stream(faulted(kind, x, r_f, 0.15));
        const Stream s = apply_attack(clean, healthy_masking_attack(net, 0.1), net.line);
        bool tripped = false;
        for (const auto& fr : s) tripped |= trip_decision(fr.i1, fr.i2, relay).any_trip;
        EXPECT_FALSE(tripped) << to_string(kind) << " x=" << x << " rf=" << r_f;
        // Without the attack a bolted fault trips.
        if (r_f < 1.0) {
          EXPECT_TRUE(trip_decision(clean.back().i1, clean.back().i2, relay).any_trip);
        }
      }
    }
  }
}

TEST(StealthyFma, SatisfiesLocalVoltageCondition) {
  const LineModel line = default_network().line;
  for (double x : {0.1, 0.3, 0.5, 0.9}) {
    for (double r_f : {0.0, 5.0, 120.0}) {
      const Phasor i1 = Phasor::polar_deg(1.7, -40.0);
      const Phasor id = Phasor::polar_deg(2.3, -75.0);
      const Phasor i2 = stealthy_remote_current(i1, id, x, r_f, line);
      const Phasor want = i1 * (2.0 * x * line.z_se.positive) + id * r_f;
      const Phasor got = calculated_local_voltage(i1, i2, line);
      EXPECT_LT((got - want).magnitude() / want.magnitude(), 1e-10);
    }
  }
}

TEST(StealthyFma, RatioIdentityForBoltedFault) {
  const LineModel line = default_network().line;
  const Phasor i1 = Phasor::polar_deg(1.2, 20.0);
  for (double x : {0.05, 0.2, 0.4, 0.6, 0.9}) {
    const Phasor i2 = stealthy_remote_current(i1, Phasor(), x, 0.0, line);
    const Complex ratio = (i1 + i2) / i1;
    const Complex want = stealthy_ratio_pu(x, line);
    EXPECT_LT(std::abs(ratio - want), 1e-9 * std::max(1e-3, std::abs(want)));
  }
  EXPECT_LT((i1 + stealthy_remote_current(i1, Phasor(), 0.5, 0.0, line)).magnitude(), 1e-12);

  const Complex z_pu = line.z_se.positive / line.z_sh.positive;
  const Phasor far = i1 + stealthy_remote_current(i1, Phasor(), 0.9, 0.0, line);
  EXPECT_NEAR(wrap_angle(far.angle() - i1.angle()), std::arg(z_pu), 1e-9);
  const Phasor near = i1 + stealthy_remote_current(i1, Phasor(), 0.1, 0.0, line);
  EXPECT_NEAR(wrap_angle(near.angle() - i1.angle()), std::arg(-z_pu), 1e-9);
}

TEST(StealthyFma, RejectsLocationOutsideLine) {
  const LineModel line = default_network().line;
  EXPECT_THROW(apply_stealthy_fma(one_frame({}), {1.0, 0.0}, 0.0, line), InvalidAttackParams);
  EXPECT_THROW(apply_stealthy_fma(one_frame({}), {0.0, 0.0}, 0.0, line), InvalidAttackParams);
}

TEST(Awgn, DisabledIsIdentity) {
  const Stream clean = generate_stream(faulted(FaultKind::AG, 0.5, 1.0));
  EXPECT_EQ(add_awgn(clean, std::numeric_limits<double>::infinity(), 3), clean);
  DistortionSpec none;
  EXPECT_EQ(apply_distortion(clean, none, 3), clean);
}

TEST(Awgn, EmpiricalSnrMatchesTarget) {
  LineScenario sc;
  sc.network = default_network();
  sc.duration_s = 100.0;
  const Stream clean = generate_stream(sc);
  ASSERT_EQ(clean.size(), 100000u);
  const Stream noisy = add_awgn(clean, 35.0, 11);
  double sig = 0.0, noise = 0.0;
  for (std::size_t k = 0; k < clean.size(); ++k) {
    sig += std::norm(clean[k].i1.b.complex());
    noise += std::norm((noisy[k].i1.b - clean[k].i1.b).complex());
  }
  EXPECT_NEAR(10.0 * std::log10(sig / noise), 35.0, 0.5);
}

TEST(Awgn, SeededAndDeterministic) {
  const Stream clean = generate_stream(faulted(FaultKind::AG, 0.5, 1.0));
  EXPECT_EQ(add_awgn(clean, 35.0, 5), add_awgn(clean, 35.0, 5));
  EXPECT_NE(add_awgn(clean, 35.0, 5), add_awgn(clean, 35.0, 6));
}

TEST(CtSaturation, ScalesAndAdvancesAboveKnee) {
  const Stream s = apply_ct_saturation(
      one_frame({Phasor(2.0, 0.0), Phasor(0.5, 0.0), Phasor(1.5, 0.0)}), {0.7, 0.2, 1.0});
  EXPECT_NEAR(s[0].i1.a.magnitude(), 1.4, 1e-12);
  EXPECT_NEAR(rad_to_deg(s[0].i1.a.angle()), 11.459, 1e-3);
  EXPECT_EQ(s[0].i1.b, Phasor(0.5, 0.0));
  EXPECT_NEAR(s[0].i1.c.magnitude(), 1.05, 1e-12);
}

TEST(CtSaturation, UnitParametersAreIdentity) {
  const Stream clean = generate_stream(faulted(FaultKind::ABC, 0.2, 0.001));
  EXPECT_EQ(apply_ct_saturation(clean, {1.0, 0.0, 0.0}), clean);
  EXPECT_THROW(apply_ct_saturation(clean, {0.0, 0.0, 1.0}), InvalidAttackParams);
  EXPECT_THROW(apply_ct_saturation(clean, {0.5, -0.1, 1.0}), InvalidAttackParams);
}
