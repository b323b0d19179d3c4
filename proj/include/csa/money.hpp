#pragma once

#include <cstdint>
#include <string>

namespace csa {

// Exact decimal money value, stored as a scaled 64-bit integer.
// The scale is global (units per whole currency unit, default 1e6) so that
// bid sums and welfare comparisons are exact and ties are unambiguous.
class Money {
public:
  Money() = default;

  static Money from_units(std::int64_t units) {
    Money m;
    m.units_ = units;
    return m;
  }
  static Money zero() { return Money{}; }

  // Parses a decimal string such as "8", "-0.25" or "1.333333".
  // Rejects strings with more fractional digits than the scale resolves.
  static Money parse(const std::string& text);

  // Whole currency units -> Money (e.g. from_value(8) == parse("8")).
  static Money from_value(std::int64_t whole);

  // Nearest representable decimal; used to snap solver output back onto
  // the money grid for exact comparisons.
  static Money from_double_rounded(double value);

  static std::int64_t scale() { return scale_; }
  // Must be a power of ten in [1, 1e18). Affects all Money values; intended
  // to be set once at startup before any Money is created.
  static void set_scale(std::int64_t scale);

  std::int64_t units() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / static_cast<double>(scale_); }
  // Canonical decimal rendering, trailing zeros trimmed ("8", "0.5").
  std::string to_string() const;

  Money operator+(Money o) const { return from_units(units_ + o.units_); }
  Money operator-(Money o) const { return from_units(units_ - o.units_); }
  Money operator-() const { return from_units(-units_); }
  Money& operator+=(Money o) {
    units_ += o.units_;
    return *this;
  }
  Money& operator-=(Money o) {
    units_ -= o.units_;
    return *this;
  }
  Money operator*(std::int64_t k) const { return from_units(units_ * k); }

  auto operator<=>(const Money&) const = default;

private:
  static std::int64_t scale_;
  std::int64_t units_ = 0;
};

}  // namespace csa
