#include "maskguard/phasor.hpp"

#include <cmath>
#include <stdexcept>

namespace maskguard {

double wrap_angle(double rad) {
  double w = std::remainder(rad, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

Phasor Phasor::polar(double magnitude, double angle_rad) {
  return Phasor(std::polar(magnitude, angle_rad));
}

double Phasor::angle() const {
  double a = std::arg(z_);
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

bool Phasor::is_finite() const {
  return std::isfinite(z_.real()) && std::isfinite(z_.imag());
}

Phasor& ThreePhaseSet::operator[](std::size_t k) {
  switch (k) {
    case 0: return a;
    case 1: return b;
    case 2: return c;
  }
  throw std::out_of_range("phase index");
}

const Phasor& ThreePhaseSet::operator[](std::size_t k) const {
  return const_cast<ThreePhaseSet&>(*this)[k];
}

ThreePhaseSet ThreePhaseSet::balanced(Phasor a) {
  return {a, a * (kAlpha * kAlpha), a * kAlpha};
}

ThreePhaseSet& ThreePhaseSet::operator+=(const ThreePhaseSet& o) {
  a += o.a;
  b += o.b;
  c += o.c;
  return *this;
}

ThreePhaseSet& ThreePhaseSet::operator-=(const ThreePhaseSet& o) {
  a -= o.a;
  b -= o.b;
  c -= o.c;
  return *this;
}

ThreePhaseSet& ThreePhaseSet::operator*=(Complex k) {
  a *= k;
  b *= k;
  c *= k;
  return *this;
}

bool ThreePhaseSet::is_finite() const {
  return a.is_finite() && b.is_finite() && c.is_finite();
}

Phasor& SequenceSet::operator[](std::size_t k) {
  switch (k) {
    case 0: return zero;
    case 1: return positive;
    case 2: return negative;
  }
  throw std::out_of_range("sequence index");
}

const Phasor& SequenceSet::operator[](std::size_t k) const {
  return const_cast<SequenceSet&>(*this)[k];
}

SequenceSet& SequenceSet::operator+=(const SequenceSet& o) {
  zero += o.zero;
  positive += o.positive;
  negative += o.negative;
  return *this;
}

SequenceSet to_sequence(const ThreePhaseSet& abc) {
  const Complex a = abc.a.complex(), b = abc.b.complex(), c = abc.c.complex();
  const Complex a2 = kAlpha * kAlpha;
  return {Phasor((a + b + c) / 3.0), Phasor((a + kAlpha * b + a2 * c) / 3.0),
          Phasor((a + a2 * b + kAlpha * c) / 3.0)};
}

ThreePhaseSet from_sequence(const SequenceSet& seq) {
  const Complex z = seq.zero.complex(), p = seq.positive.complex(), n = seq.negative.complex();
  const Complex a2 = kAlpha * kAlpha;
  return {Phasor(z + p + n), Phasor(z + a2 * p + kAlpha * n), Phasor(z + kAlpha * p + a2 * n)};
}

}  // namespace maskguard
