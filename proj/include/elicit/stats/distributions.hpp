#pragma once

namespace elicit::stats {

double normal_cdf(double x);
/// Inverse normal CDF (Wichura AS241, about 1e-16 relative accuracy).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

double t_cdf(double t, double df);
double t_quantile(double p, double df);

/// Noncentral t CDF (Lenth AS243).
double noncentral_t_cdf(double t, double df, double delta);

}  // namespace elicit::stats
