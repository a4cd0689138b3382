#include "ivt/optimize.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace ivt {

OptimizeResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const OptimizeOptions& options) {
    constexpr double kArmijo = 1e-4;
    constexpr int kMaxHalvings = 60;
    const Eigen::Index p = x0.size();
    OptimizeResult res;
    res.x = x0;
    res.gradient.resize(p);
    res.value = f(res.x, res.gradient);
    res.evaluations = 1;
    if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
        res.message = "objective not finite at the starting point";
        return res;
    }
    Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd g_new(p);
    bool scaled = false;
    for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
        if (res.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
            res.converged = true;
            res.message = "gradient tolerance reached";
            return res;
        }
        Eigen::VectorXd dir = -inv_h * res.gradient;
        double slope = res.gradient.dot(dir);
        if (!(slope < 0.0)) {
            inv_h.setIdentity();
            dir = -res.gradient;
            slope = res.gradient.dot(dir);
        }
        // keep the first trial step moderate on the transformed scale
        const double longest = dir.lpNorm<Eigen::Infinity>();
        double step = longest > 2.0 ? 2.0 / longest : 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new(p);
        double f_new = 0.0;
        for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
            x_new = res.x + step * dir;
            f_new = f(x_new, g_new);
            ++res.evaluations;
            if (!std::isfinite(f_new) || !g_new.allFinite()) continue;
            if (f_new <= res.value + kArmijo * step * slope) {
                accepted = true;
                break;
            }
            // roundoff floor: no increase and a smaller gradient
            if (f_new <= res.value &&
                g_new.lpNorm<Eigen::Infinity>() < res.gradient.lpNorm<Eigen::Infinity>()) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.message = "line search failed to decrease the objective";
            return res;
        }
        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = g_new - res.gradient;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                inv_h *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
            inv_h = (I - rho * s * y.transpose()) * inv_h * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        res.x = x_new;
        res.value = f_new;
        res.gradient = g_new;
    }
    res.converged = res.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
    res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
    return res;
}

OptimizeResult least_squares(const Residuals& r, const Eigen::VectorXd& x0, const OptimizeOptions& options) {
    OptimizeResult res;
    res.x = x0;
    Eigen::MatrixXd jac;
    Eigen::VectorXd resid = r(res.x, jac);
    res.evaluations = 1;
    if (!resid.allFinite() || !jac.allFinite()) {
        res.message = "residuals not finite at the starting point";
        return res;
    }
    res.value = 0.5 * resid.squaredNorm();
    res.gradient = jac.transpose() * resid;
    double damping = 1e-3;
    Eigen::MatrixXd jac_new;
    for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
        if (res.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
            res.converged = true;
            res.message = "gradient tolerance reached";
            return res;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        bool improved = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += damping * (jtj.diagonal().array() + 1e-12).matrix();
            const Eigen::VectorXd step = a.ldlt().solve(-res.gradient);
            const Eigen::VectorXd x_new = res.x + step;
            const Eigen::VectorXd resid_new = r(x_new, jac_new);
            ++res.evaluations;
            const double v_new = resid_new.allFinite() ? 0.5 * resid_new.squaredNorm() : INFINITY;
            if (std::isfinite(v_new) && jac_new.allFinite() && v_new <= res.value) {
                const double rel = step.norm() / (res.x.norm() + 1e-12);
                const double drop = res.value - v_new;
                res.x = x_new;
                resid = resid_new;
                jac = jac_new;
                res.value = v_new;
                res.gradient = jac.transpose() * resid;
                damping = std::max(damping / 3.0, 1e-12);
                improved = true;
                if (rel < 1e-12 || drop <= 1e-30) {
                    res.converged = true;
                    res.message = "step tolerance reached";
                    return res;
                }
                break;
            }
            damping *= 4.0;
        }
        if (!improved) {
            res.converged = res.gradient.lpNorm<Eigen::Infinity>() <= std::sqrt(options.gradient_tolerance);
            res.message = "no further decrease of the residual norm";
            return res;
        }
    }
    res.converged = res.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
    res.message = res.converged ? "gradient tolerance reached" : "iteration limit reached";
    return res;
}

}  // namespace ivt
