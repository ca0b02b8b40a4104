#include "elicit/stats/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "elicit/error.hpp"
#include "elicit/stats/distributions.hpp"

namespace elicit::stats {

namespace {

template <std::size_t N>
double poly(const double (&c)[N], double x) {
  double r = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
  return r;
}

}  // namespace

ShapiroWilk shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw Error(ErrorCode::SampleTooSmall, "Shapiro-Wilk needs n >= 3");
  if (n > 5000) throw Error(ErrorCode::InvalidParameter, "Shapiro-Wilk supports n <= 5000");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() < 1e-19 * std::max(1.0, std::abs(x.front())))
    throw Error(ErrorCode::ZeroVariance, "Shapiro-Wilk sample is constant");

  static constexpr double g[] = {-2.273, .459};
  static constexpr double c1[] = {0., .221157, -.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[] = {0., .042981, -.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double c3[] = {.544, -.39978, .025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -.77857, .062767, -.0020322};
  static constexpr double c5[] = {-1.5861, -.31082, -.083751, .0038915};
  static constexpr double c6[] = {-.4803, -.082676, .0030302};

  const std::size_t half = n / 2;
  const double an = static_cast<double>(n);
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    std::vector<double> m(half);
    double summ2 = 0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = normal_quantile((static_cast<double>(i + 1) - .375) / (an + .25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - m[0] / ssumm2;
    std::size_t first;
    double fac;
    if (n > 5) {
      const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
      fac = std::sqrt((summ2 - 2 * m[0] * m[0] - 2 * m[1] * m[1]) / (1 - 2 * a1 * a1 - 2 * a2 * a2));
      a[1] = a2;
      first = 2;
    } else {
      fac = std::sqrt((summ2 - 2 * m[0] * m[0]) / (1 - 2 * a1 * a1));
      first = 1;
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  }

  // Centre and scale first so W is computed on well-conditioned values.
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / an;
  const double range = x.back() - x.front();
  double ss = 0, num = 0;
  for (auto& v : x) {
    v = (v - mean) / range;
    ss += v * v;
  }
  for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
  double w = std::min(1.0, num * num / ss);

  ShapiroWilk out{w, 1};
  if (n == 3) {
    constexpr double pi6 = 6 / std::numbers::pi;
    constexpr double stqr = std::numbers::pi / 3;
    out.p = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return out;
  }
  double y = std::log1p(-w);
  double mu, sigma;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (y >= gamma) {
      out.p = 1e-99;
      return out;
    }
    y = -std::log(gamma - y);
    mu = poly(c3, an);
    sigma = std::exp(poly(c4, an));
  } else {
    const double ln = std::log(an);
    mu = poly(c5, ln);
    sigma = std::exp(poly(c6, ln));
  }
  out.p = 1 - normal_cdf((y - mu) / sigma);
  return out;
}

TTest t_test_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw Error(ErrorCode::SampleTooSmall, "t test needs at least 2 observations per sample");
  auto moments = [](std::span<const double> s) {
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double ss = 0;
    for (double v : s) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss};
  };
  const auto [ma, ssa] = moments(a);
  const auto [mb, ssb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const int df = static_cast<int>(a.size() + b.size() - 2);
  const double pooled = (ssa + ssb) / df;
  if (!(pooled > 0)) throw Error(ErrorCode::ZeroVariance, "pooled variance is zero");
  const double t = (ma - mb) / std::sqrt(pooled * (1 / na + 1 / nb));
  // Two-tailed p is I_x(df/2, 1/2) with x = df / (df + t^2).
  const double p = incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return {t, df, std::clamp(p, 0.0, 1.0)};
}

double power_two_sample_at(double effect_size, int n, double alpha) {
  const double df = 2.0 * n - 2;
  const double ncp = effect_size * std::sqrt(n / 2.0);
  const double crit = t_quantile(1 - alpha / 2, df);
  return 1 - noncentral_t_cdf(crit, df, ncp) + noncentral_t_cdf(-crit, df, ncp);
}

int power_two_sample(double effect_size, double power, double alpha) {
  if (!(effect_size > 0) || !std::isfinite(effect_size))
    throw Error(ErrorCode::InvalidParameter, "effect size must be positive");
  if (!(power > 0 && power < 1)) throw Error(ErrorCode::InvalidParameter, "power must be in (0, 1)");
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorCode::InvalidParameter, "alpha must be in (0, 1)");
  // The z-test size is a lower bound for the t test; start the ascent a little below it.
  const double z = normal_quantile(1 - alpha / 2) + normal_quantile(power);
  const int start =
      z > 0 ? std::max(2, static_cast<int>(0.9 * 2 * z * z / (effect_size * effect_size))) : 2;
  for (int n = start; n <= 10'000'000; ++n)
    if (power_two_sample_at(effect_size, n, alpha) >= power) return n;
  throw Error(ErrorCode::InvalidParameter, "required sample size exceeds 10^7 per group");
}

}  // namespace elicit::stats
