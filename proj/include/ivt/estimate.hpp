#pragma once

#include "ivt/family.hpp"
#include "ivt/optimize.hpp"
#include "ivt/pairwise.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ivt {

struct FitOptions {
    int K{0};  // 0 selects default_K(family)
    std::optional<Eigen::VectorXd> init;
    int multistarts{3};
    std::uint64_t jitter_seed{20240101};
    OptimizeOptions optimizer{};
};

struct FitResult {
    Family family;
    double delta{1.0};
    long n{0};
    int K{1};
    Eigen::VectorXd theta;
    double cl{0.0};
    bool converged{false};
    bool boundary{false};
    int iterations{0};
    double gradient_norm{0.0};
    std::string init_source;
    /// Largest relative spread of the multistart optima (empty when no multistart ran).
    std::optional<double> multistart_spread;
    std::vector<std::string> diagnostics;
};

/// Log composite likelihood and its gradient in family parameters.
[[nodiscard]] CompositeValue family_composite(Family family, const Eigen::VectorXd& theta, double delta,
                                              const PairIndex& index, bool with_gradient);

/// Gradient of the log composite likelihood with respect to the unconstrained parameters.
[[nodiscard]] Eigen::VectorXd cl_gradient_unconstrained(Family family, const Eigen::VectorXd& eta,
                                                        const CountSeries& x, int K);

/// Maximum composite likelihood fit. Quasi-Newton on the unconstrained scale,
/// started from the two-step GMM estimate unless init is given.
[[nodiscard]] FitResult fit_mcl(Family family, const CountSeries& x, const FitOptions& options = {});

}  // namespace ivt
