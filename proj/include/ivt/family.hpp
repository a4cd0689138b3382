#pragma once

#include "ivt/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace ivt {

enum class SeedKind { Poisson, NegBin, Skellam };
enum class TrawlKind { Exp, SupExp, Ig, Gamma };

/// A parametric model class such as "nb-gamma".
///
/// The family parameter vector theta lists the seed parameters followed by
/// the trawl parameters: nu | m, p | psi_plus, psi_minus, then lambda |
/// w, lambda1, lambda2 | delta, gamma | H, alpha. The superposition family
/// has two exponentials with weights (w, 1 - w) so that d(0) = 1.
struct Family {
    SeedKind seed{SeedKind::Poisson};
    TrawlKind trawl{TrawlKind::Exp};

    [[nodiscard]] std::string tag() const;
    friend bool operator==(const Family&, const Family&) = default;
};

[[nodiscard]] Family parse_family(std::string_view tag);

[[nodiscard]] std::vector<std::string> parameter_names(Family family);

[[nodiscard]] int parameter_count(Family family);
[[nodiscard]] int seed_parameter_count(Family family);
[[nodiscard]] int trawl_parameter_count(Family family);

/// 1 for an exponential trawl, 10 otherwise.
[[nodiscard]] int default_K(Family family);

[[nodiscard]] IvtModel make_model(Family family, const Eigen::VectorXd& theta, double delta);

/// Derivative of the model parameters (seed, trawl spec) with respect to theta.
[[nodiscard]] Eigen::MatrixXd model_jacobian(Family family, const Eigen::VectorXd& theta);

/// Whether parameter i lives in (0, 1) rather than (0, inf).
[[nodiscard]] bool is_unit_interval(Family family, int i);

/// Log for positive parameters, logit for those in (0, 1).
[[nodiscard]] Eigen::VectorXd to_unconstrained(Family family, const Eigen::VectorXd& theta);
[[nodiscard]] Eigen::VectorXd from_unconstrained(Family family, const Eigen::VectorXd& eta);

/// Diagonal of d theta / d eta.
[[nodiscard]] Eigen::VectorXd transform_jacobian(Family family, const Eigen::VectorXd& eta);

/// Throws DomainError unless theta is a valid parameter vector.
void validate(Family family, const Eigen::VectorXd& theta);

}  // namespace ivt
