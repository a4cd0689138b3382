#pragma once

#include "ivt/family.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ivt {

/// Sample autocorrelations at lags 1..max_lag (autocovariances with denominator n).
[[nodiscard]] Eigen::VectorXd sample_acf(const CountSeries& x, int max_lag);

/// Sample mean and variance (denominator n).
[[nodiscard]] std::pair<double, double> sample_cumulants(const CountSeries& x);

struct GmmResult {
    Eigen::VectorXd theta;
    bool ok{false};
    bool boundary{false};
    double objective{0.0};
    std::string diagnostic;
};

/// Seed parameters matching the first two cumulants of X given Leb(A).
[[nodiscard]] GmmResult seed_from_cumulants(Family family, double kappa1, double kappa2, double leb);

/// Least-squares fit of the trawl autocorrelation to rho_hat (lags 1..K in
/// steps of delta), then cumulant matching for the seed. Exponential trawls
/// use lambda = -log rho_hat(1) / delta.
[[nodiscard]] GmmResult gmm_two_step_from_moments(Family family, const Eigen::VectorXd& rho_hat, double kappa1,
                                                  double kappa2, double delta);

[[nodiscard]] GmmResult fit_gmm_two_step(Family family, const CountSeries& x, int K_lags);

/// Model moments (mu, D(0), ..., D(m)) with D(k) = E[X_0 X_{k delta}].
[[nodiscard]] Eigen::VectorXd model_moments(const IvtModel& model, int m);

/// d model_moments / d theta in family parameters.
[[nodiscard]] Eigen::MatrixXd model_moment_jacobian(Family family, const Eigen::VectorXd& theta, double delta, int m);

/// Rows (x_t, x_t^2, x_t x_{t+1}, ..., x_t x_{t+m}) for t = 1..n-m.
[[nodiscard]] Eigen::MatrixXd moment_contributions(const CountSeries& x, int m);

/// Gamma_0 + sum_{l=1}^{L} (Gamma_l + Gamma_l') of the rows of h, centered at their mean.
[[nodiscard]] Eigen::MatrixXd long_run_covariance(const Eigen::MatrixXd& h, int L);

enum class GmmWeighting { Identity, TwoStage, Given };

struct GmmWeight {
    GmmWeighting kind{GmmWeighting::Identity};
    Eigen::MatrixXd matrix;  // used when kind == Given
    int long_run_lags{50};
};

/// Minimizes g' A g over theta for the m + 2 moments.
[[nodiscard]] GmmResult fit_gmm_full(Family family, const CountSeries& x, int m, const GmmWeight& weight = {},
                                     const std::optional<Eigen::VectorXd>& init = std::nullopt);

/// Same estimator driven by given sample moment means (mean, mean x^2, mean x_t x_{t+k}).
[[nodiscard]] GmmResult gmm_full_from_moments(Family family, const Eigen::VectorXd& sample_means, double delta,
                                              const Eigen::MatrixXd& A, const Eigen::VectorXd& init);

/// M Sigma_a M' with M = (G'AG)^{-1} G'A and G = -d moments / d theta.
[[nodiscard]] Eigen::MatrixXd gmm_asymptotic_variance(Family family, const Eigen::VectorXd& theta, double delta, int m,
                                                      const Eigen::MatrixXd& A, const Eigen::MatrixXd& sigma_a);

/// Average over B simulated paths of length N of the long-run covariance of
/// the moment contributions at theta (L lags).
[[nodiscard]] Eigen::MatrixXd gmm_sigma_a_sim(Family family, const Eigen::VectorXd& theta, double delta, int m, long B,
                                              long N, std::uint64_t seed, int workers = 1, int L = 50);

}  // namespace ivt
