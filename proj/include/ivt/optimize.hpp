#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>

namespace ivt {

struct OptimizeOptions {
    double gradient_tolerance{1e-6};
    int max_iterations{500};
};

struct OptimizeResult {
    Eigen::VectorXd x;
    double value{0.0};
    Eigen::VectorXd gradient;
    int iterations{0};
    int evaluations{0};
    bool converged{false};
    std::string message;
};

/// Objective returning f(x) and writing its gradient. A non-finite value
/// marks an infeasible point and makes the line search back off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& gradient)>;

/// BFGS on the inverse Hessian with a backtracking Armijo line search.
/// Accepted steps never increase f. Converged when the largest gradient
/// component is below the tolerance.
[[nodiscard]] OptimizeResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                                           const OptimizeOptions& options = {});

/// Residual vector r(x) with Jacobian J(x).
using Residuals = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, Eigen::MatrixXd& jacobian)>;

/// Levenberg-Marquardt minimization of 0.5 |r(x)|^2.
[[nodiscard]] OptimizeResult least_squares(const Residuals& r, const Eigen::VectorXd& x0,
                                           const OptimizeOptions& options = {});

}  // namespace ivt
