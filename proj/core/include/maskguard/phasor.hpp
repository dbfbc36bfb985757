#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>

namespace maskguard {

using Complex = std::complex<double>;
// Impedances and admittances are plain complex numbers in ohms / siemens.
using Impedance = Complex;

double wrap_angle(double rad);
inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Complex RMS phasor in kV or kA.
class Phasor {
 public:
  constexpr Phasor() = default;
  constexpr Phasor(double re, double im) : z_(re, im) {}
  constexpr explicit Phasor(Complex z) : z_(z) {}

  static Phasor polar(double magnitude, double angle_rad);
  static Phasor polar_deg(double magnitude, double angle_deg) {
    return polar(magnitude, deg_to_rad(angle_deg));
  }

  constexpr double re() const { return z_.real(); }
  constexpr double im() const { return z_.imag(); }
  double magnitude() const { return std::abs(z_); }
  // Wrapped to (-pi, pi].
  double angle() const;
  constexpr Complex complex() const { return z_; }
  bool is_finite() const;

  Phasor& operator+=(Phasor o) { z_ += o.z_; return *this; }
  Phasor& operator-=(Phasor o) { z_ -= o.z_; return *this; }
  Phasor& operator*=(Complex k) { z_ *= k; return *this; }
  Phasor& operator*=(double k) { z_ *= k; return *this; }
  Phasor& operator/=(Complex k) { z_ /= k; return *this; }

  friend Phasor operator+(Phasor a, Phasor b) { return a += b; }
  friend Phasor operator-(Phasor a, Phasor b) { return a -= b; }
  friend Phasor operator-(Phasor a) { return Phasor(-a.z_); }
  friend Phasor operator*(Phasor a, Complex k) { return a *= k; }
  friend Phasor operator*(Complex k, Phasor a) { return a *= k; }
  friend Phasor operator*(Phasor a, double k) { return a *= k; }
  friend Phasor operator*(double k, Phasor a) { return a *= k; }
  friend Phasor operator/(Phasor a, Complex k) { return a /= k; }
  // Ratio of two phasors (e.g. V/I gives an impedance).
  friend Complex operator/(Phasor a, Phasor b) { return a.z_ / b.z_; }
  friend bool operator==(const Phasor&, const Phasor&) = default;

 private:
  Complex z_{};
};

// alpha = e^{+j 2pi/3}; phase order a-b-c is positive.
inline const Complex kAlpha = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);

struct ThreePhaseSet {
  Phasor a, b, c;

  Phasor& operator[](std::size_t k);
  const Phasor& operator[](std::size_t k) const;

  // Positive-rotation set with phase a equal to `a`.
  static ThreePhaseSet balanced(Phasor a);
  static ThreePhaseSet uniform(Phasor p) { return {p, p, p}; }

  ThreePhaseSet& operator+=(const ThreePhaseSet& o);
  ThreePhaseSet& operator-=(const ThreePhaseSet& o);
  ThreePhaseSet& operator*=(Complex k);
  friend ThreePhaseSet operator+(ThreePhaseSet x, const ThreePhaseSet& y) { return x += y; }
  friend ThreePhaseSet operator-(ThreePhaseSet x, const ThreePhaseSet& y) { return x -= y; }
  friend ThreePhaseSet operator-(ThreePhaseSet x) { return x *= -1.0; }
  friend ThreePhaseSet operator*(ThreePhaseSet x, Complex k) { return x *= k; }
  friend ThreePhaseSet operator*(Complex k, ThreePhaseSet x) { return x *= k; }
  friend bool operator==(const ThreePhaseSet&, const ThreePhaseSet&) = default;

  bool is_finite() const;
};

enum class Sequence : std::size_t { Zero = 0, Positive = 1, Negative = 2 };

struct SequenceSet {
  Phasor zero, positive, negative;

  Phasor& operator[](std::size_t k);
  const Phasor& operator[](std::size_t k) const;
  Phasor& operator[](Sequence s) { return (*this)[static_cast<std::size_t>(s)]; }
  const Phasor& operator[](Sequence s) const { return (*this)[static_cast<std::size_t>(s)]; }

  SequenceSet& operator+=(const SequenceSet& o);
  friend SequenceSet operator+(SequenceSet x, const SequenceSet& y) { return x += y; }
  friend bool operator==(const SequenceSet&, const SequenceSet&) = default;
};

SequenceSet to_sequence(const ThreePhaseSet& abc);
ThreePhaseSet from_sequence(const SequenceSet& seq);

}  // namespace maskguard
