#pragma once

#include "ivt/model.hpp"

#include <algorithm>
#include <string>

namespace ivt {

/// P(X_{t+h} = k | X_t = x_t) for k = 0..cap under the pairwise approximation.
struct PredictivePmf {
    double h{0.0};
    long x_t{0};
    Eigen::VectorXd p;

    [[nodiscard]] long cap() const { return static_cast<long>(p.size()) - 1; }
    /// Mass beyond the cap.
    [[nodiscard]] double tail_mass() const { return std::max(0.0, 1.0 - p.sum()); }
};

/// Law of the overlap count L(A_t ∩ A_{t+h}) given X_t = x_t, on 0..x_t.
/// Binomial(x_t, rho(h)) for a Poisson seed, Dirichlet-multinomial for NB.
[[nodiscard]] Eigen::VectorXd overlap_conditional(const IvtModel& model, double h, long x_t);

[[nodiscard]] PredictivePmf predictive_pmf(const IvtModel& model, double h, long x_t, long M_cap = 60);

enum class PointRule { Mean, Mode, Median };

[[nodiscard]] PointRule parse_point_rule(const std::string& name);

/// Mean over 0..cap, smallest mode, or smallest k with CDF >= 1/2.
[[nodiscard]] double point_forecast(const PredictivePmf& pmf, PointRule rule);

/// Smallest k with CDF(k) >= level, or cap + 1 when the listed mass falls short.
[[nodiscard]] long predictive_quantile(const PredictivePmf& pmf, double level);

}  // namespace ivt
