#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace elicit {

/// Exact non-negative-denominator fraction for reported rates.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const auto g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  [[nodiscard]] constexpr std::int64_t num() const noexcept { return num_; }
  [[nodiscard]] constexpr std::int64_t den() const noexcept { return den_; }
  [[nodiscard]] constexpr double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend constexpr Rational operator+(Rational a, Rational b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend constexpr Rational operator-(Rational a, Rational b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend constexpr bool operator==(Rational a, Rational b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend constexpr bool operator<(Rational a, Rational b) noexcept {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend constexpr bool operator<=(Rational a, Rational b) noexcept { return !(b < a); }

  /// Percentage rounded half-up to `decimals` places, e.g. "81.0%".
  [[nodiscard]] std::string percent(int decimals = 1) const;
  /// "num/den".
  [[nodiscard]] std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline std::string Rational::percent(int decimals) const {
  // Integer arithmetic so 2/3 renders as 66.7% on every platform.
  std::int64_t scale = 100;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const bool neg = num_ < 0;
  const std::int64_t n = neg ? -num_ : num_;
  const std::int64_t scaled = (n * scale * 2 + den_) / (den_ * 2);
  std::int64_t unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  std::string out = (neg ? "-" : "") + std::to_string(scaled / unit);
  if (decimals > 0) {
    std::string frac = std::to_string(scaled % unit);
    out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out + "%";
}

}  // namespace elicit
