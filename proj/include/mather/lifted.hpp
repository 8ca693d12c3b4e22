#pragma once

#include <cmath>
#include <cstdint>

namespace mather {

/// A real number stored as an integer part plus a double remainder.
///
/// Hull values and configuration sites live on the lift of the circle, where
/// adding an integer is a symmetry of every interaction term. Keeping the
/// integer separate makes `x + n` exact, and lets pair evaluations reduce both
/// arguments by the same integer before calling into the model, so results are
/// bitwise independent of integer translates.
struct Lifted {
  double frac = 0.0;
  std::int64_t whole = 0;

  static Lifted from_double(double x) {
    const double w = std::floor(x);
    return {x - w, static_cast<std::int64_t>(w)};
  }

  double value() const { return frac + static_cast<double>(whole); }

  Lifted plus(std::int64_t n) const { return {frac, whole + n}; }

  /// `other - *this` computed with the integer parts cancelled first.
  double offset_to(const Lifted& other) const {
    return (other.frac - frac) + static_cast<double>(other.whole - whole);
  }

  /// `other` expressed relative to this value's integer part.
  double reduce(const Lifted& other) const {
    return other.frac + static_cast<double>(other.whole - whole);
  }

  /// Total order on the represented reals.
  bool less(const Lifted& other) const { return offset_to(other) > 0.0; }
  bool less_equal(const Lifted& other) const { return offset_to(other) >= 0.0; }

  friend bool operator==(const Lifted&, const Lifted&) = default;
};

}  // namespace mather
