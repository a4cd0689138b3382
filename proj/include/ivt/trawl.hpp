#pragma once

#include "ivt/errors.hpp"

#include <Eigen/Core>

#include <variant>
#include <vector>

namespace ivt {

// Trawl functions d on (-inf, 0]. Functions below take a nonnegative depth
// r = -s and a nonnegative lag h.

struct ExpTrawl {
    double lambda;
};

/// d(s) = sum_i w_i exp(lambda_i s). Weights are free positives.
struct SupExpTrawl {
    std::vector<double> weights;
    std::vector<double> rates;
};

/// Inverse Gaussian trawl, d(s) = (1 - 2s/gamma^2)^(-1/2) exp(delta gamma (1 - sqrt(1 - 2s/gamma^2))).
struct IgTrawl {
    double delta;
    double gamma;
};

/// Gamma trawl, d(s) = (1 - s/alpha)^(-(H+1)).
struct GammaTrawl {
    double H;
    double alpha;
};

using TrawlSpec = std::variant<ExpTrawl, SupExpTrawl, IgTrawl, GammaTrawl>;

void validate(const TrawlSpec& trawl);

/// Parameter order: Exp (lambda); SupExp (w_1..w_q, lambda_1..lambda_q); IG (delta, gamma); Gamma (H, alpha).
[[nodiscard]] int parameter_count(const TrawlSpec& trawl);

[[nodiscard]] Eigen::VectorXd parameters(const TrawlSpec& trawl);

/// Rebuilds a spec of the same variant from a parameter vector.
[[nodiscard]] TrawlSpec with_parameters(const TrawlSpec& like, const Eigen::VectorXd& params);

/// d(-r) for depth r >= 0.
[[nodiscard]] double trawl_height(const TrawlSpec& trawl, double r);

[[nodiscard]] double leb_full(const TrawlSpec& trawl);

/// Leb(A_h ∩ A).
[[nodiscard]] double leb_intersection(const TrawlSpec& trawl, double h);

/// Leb(A_h \ A), computed without cancellation.
[[nodiscard]] double leb_difference(const TrawlSpec& trawl, double h);

[[nodiscard]] double acf(const TrawlSpec& trawl, double h);

/// Partials of Leb(A), Leb(A_h ∩ A) and Leb(A_h \ A) with respect to the trawl parameters.
struct LebGradient {
    Eigen::VectorXd full;
    Eigen::VectorXd intersection;
    Eigen::VectorXd difference;
};

[[nodiscard]] LebGradient leb_gradients(const TrawlSpec& trawl, double h);

/// Partials of acf(h).
[[nodiscard]] Eigen::VectorXd acf_gradient(const TrawlSpec& trawl, double h);

/// True for a Gamma trawl with H <= 1, whose autocorrelation is not integrable.
[[nodiscard]] bool is_long_memory(const TrawlSpec& trawl);

}  // namespace ivt
