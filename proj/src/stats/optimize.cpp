#include "optimize.hpp"

#include <cmath>
#include <limits>

namespace elicit::stats::detail {

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + h;
    const double up = f(y);
    y[i] = x[i] - h;
    const double down = f(y);
    y[i] = x[i];
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x) {
  const auto n = x.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd step(n);
  for (Eigen::Index i = 0; i < n; ++i) step[i] = 1e-4 * std::max(1.0, std::abs(x[i]));
  const double f0 = f(x);
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = x[i] + step[i];
    const double up = f(y);
    y[i] = x[i] - step[i];
    const double down = f(y);
    y[i] = x[i];
    h(i, i) = (up - 2 * f0 + down) / (step[i] * step[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      double s = 0;
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          y[i] = x[i] + a * step[i];
          y[j] = x[j] + b * step[j];
          s += a * b * f(y);
        }
      y[i] = x[i];
      y[j] = x[j];
      h(i, j) = h(j, i) = s / (4 * step[i] * step[j]);
    }
  }
  return h;
}

double wald_se(const Objective& f, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd info = -numeric_hessian(f, x);
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(x.size(), x.size()));
  return cov(0, 0) > 0 ? std::sqrt(cov(0, 0)) : std::numeric_limits<double>::quiet_NaN();
}

MaximizeResult maximize(const Objective& f, Eigen::VectorXd x, int max_iterations,
                        double gradient_tolerance) {
  MaximizeResult out;
  const auto n = x.size();
  double fx = f(x);
  if (!std::isfinite(fx)) {
    out.x = x;
    out.value = fx;
    out.message = "objective is not finite at the starting point";
    return out;
  }
  out.trace.push_back(fx);
  Eigen::VectorXd g = numeric_gradient(f, x);
  // Inverse Hessian approximation of -f.
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  int stalls = 0;

  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it;
    if (g.lpNorm<Eigen::Infinity>() < gradient_tolerance) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = hinv * g;
    if (!(dir.dot(g) > 0)) {
      hinv.setIdentity();
      dir = g;
    }
    // Keep the first trial step bounded so a bad curvature estimate cannot
    // throw the iterate far out of range.
    const double len = dir.norm();
    if (len > 5) dir *= 5 / len;

    double t = 1;
    Eigen::VectorXd xn;
    double fn = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      xn = x + t * dir;
      fn = f(xn);
      if (std::isfinite(fn) && fn >= fx + 1e-4 * t * dir.dot(g)) {
        accepted = fn > fx;
        break;
      }
    }
    if (!accepted) {
      // Either no ascent exists along dir or the gain is below resolution.
      if (hinv.isIdentity() || ++stalls > 2) {
        out.converged = g.lpNorm<Eigen::Infinity>() < std::sqrt(gradient_tolerance);
        if (!out.converged) out.message = "line search failed";
        break;
      }
      hinv.setIdentity();
      continue;
    }
    stalls = 0;
    const Eigen::VectorXd gn = numeric_gradient(f, xn);
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = g - gn;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }
    const bool tiny = std::abs(fn - fx) < 1e-15 * std::max(1.0, std::abs(fx));
    x = xn;
    fx = fn;
    g = gn;
    out.trace.push_back(fx);
    if (tiny && g.lpNorm<Eigen::Infinity>() < std::sqrt(gradient_tolerance)) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged && out.message.empty()) out.message = "iteration limit reached";
  out.x = x;
  out.value = fx;
  out.gradient_norm = g.lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace elicit::stats::detail
