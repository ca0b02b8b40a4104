#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace elicit::stats::detail {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct MaximizeResult {
  Eigen::VectorXd x;
  double value = 0;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0;
  std::string message;
};

/// BFGS ascent with central-difference gradients and a backtracking line search
/// that only accepts strict improvements, so `trace` is non-decreasing.
MaximizeResult maximize(const Objective& f, Eigen::VectorXd x0, int max_iterations,
                        double gradient_tolerance);

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x);
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x);

/// Wald standard error of coordinate 0 from the observed information, or NaN
/// when the negative Hessian is not positive definite.
double wald_se(const Objective& f, const Eigen::VectorXd& x);

}  // namespace elicit::stats::detail
