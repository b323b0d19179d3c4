#include "csa/money.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "csa/errors.hpp"

namespace csa {

std::int64_t Money::scale_ = 1'000'000;

void Money::set_scale(std::int64_t scale) {
  if (scale <= 0) throw InvalidInputError("money scale must be positive");
  std::int64_t s = scale;
  while (s % 10 == 0) s /= 10;
  if (s != 1) throw InvalidInputError("money scale must be a power of ten");
  scale_ = scale;
}

Money Money::from_value(std::int64_t whole) { return from_units(whole * scale_); }

Money Money::parse(const std::string& text) {
  if (text.empty()) throw InvalidInputError("empty money literal");
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '-' || text[pos] == '+') {
    negative = text[pos] == '-';
    ++pos;
  }
  if (pos == text.size()) throw InvalidInputError("money literal has no digits: '" + text + "'");

  std::int64_t whole = 0;
  bool any_digit = false;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    whole = whole * 10 + (text[pos] - '0');
    any_digit = true;
    ++pos;
  }
  std::int64_t frac = 0;
  std::int64_t frac_scale = 1;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (frac_scale == scale_) {
        // Extra digits beyond the scale are only OK when zero.
        if (text[pos] != '0')
          throw InvalidInputError("money literal '" + text + "' exceeds resolution 1/" +
                                  std::to_string(scale_));
      } else {
        frac = frac * 10 + (text[pos] - '0');
        frac_scale *= 10;
      }
      any_digit = true;
      ++pos;
    }
  }
  if (!any_digit || pos != text.size())
    throw InvalidInputError("bad money literal: '" + text + "'");

  std::int64_t units = whole * scale_ + frac * (scale_ / frac_scale);
  return from_units(negative ? -units : units);
}

Money Money::from_double_rounded(double value) {
  double scaled = value * static_cast<double>(scale_);
  return from_units(static_cast<std::int64_t>(std::llround(scaled)));
}

std::string Money::to_string() const {
  std::int64_t u = units_;
  std::string sign;
  if (u < 0) {
    sign = "-";
    u = -u;
  }
  std::int64_t whole = u / scale_;
  std::int64_t frac = u % scale_;
  std::string out = sign + std::to_string(whole);
  if (frac != 0) {
    std::string digits;
    std::int64_t s = scale_ / 10;
    while (s > 0) {
      digits.push_back(static_cast<char>('0' + frac / s));
      frac %= s;
      s /= 10;
    }
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out;
}

}  // namespace csa
