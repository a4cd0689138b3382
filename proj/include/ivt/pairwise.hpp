#pragma once

#include "ivt/model.hpp"

#include <random>
#include <string>
#include <vector>

namespace ivt {

/// Distinct observation pairs (x_i, x_{i+k}) of a series for lags 1..K, each
/// stored once with a <= b together with its multiplicity. The pair PMF is
/// symmetric so the composite likelihood only needs these counts.
class PairIndex {
public:
    struct Pair {
        long a;
        long b;
        double count;
    };

    PairIndex(const CountSeries& x, int K);

    [[nodiscard]] int K() const { return K_; }
    [[nodiscard]] long n() const { return n_; }
    [[nodiscard]] long min_value() const { return min_; }
    [[nodiscard]] long max_value() const { return max_; }
    [[nodiscard]] const std::vector<Pair>& pairs(int k) const { return pairs_[static_cast<std::size_t>(k - 1)]; }
    /// Index into pairs(k) of the pair (x_i, x_{i+k}), 0-based i < n - k.
    [[nodiscard]] int pair_of(int k, long i) const {
        return slot_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i)];
    }

private:
    int K_;
    long n_;
    long min_{0};
    long max_{0};
    std::vector<std::vector<Pair>> pairs_;
    std::vector<std::vector<int>> slot_;
};

/// Component laws for the pair (X_0, X_{k delta}): a shared part on A ∩ A_k and
/// two independent parts on A \ A_k and A_k \ A of equal measure.
struct PairContext {
    int k{1};
    double leb_shared{0.0};
    double leb_new{0.0};
    ComponentTable shared;
    ComponentTable fresh;
    Eigen::VectorXd dshared;  // d leb_shared / d trawl parameters
    Eigen::VectorXd dnew;     // d leb_new / d trawl parameters
    bool nonnegative{true};
    bool with_derivatives{false};
};

/// Context able to evaluate pairs with both values in [lo, hi].
[[nodiscard]] PairContext make_pair_context(const IvtModel& model, int k, long lo, long hi, bool with_derivatives);

/// log P(X_0 = x1, X_{k delta} = x2). If grad is given it receives the partials
/// with respect to the model parameters (seed, trawl).
[[nodiscard]] double pair_log_pmf(const PairContext& ctx, long x1, long x2, Eigen::VectorXd* grad = nullptr);

[[nodiscard]] double pair_pmf(const IvtModel& model, int k, long x1, long x2);

/// Sum of log pair PMFs over lags 1..K, together with its gradient in model
/// parameters when requested.
struct CompositeValue {
    double value{0.0};
    Eigen::VectorXd gradient;
    bool finite{true};
    std::string diagnostic;
    /// Per lag, gradients of each distinct pair's log PMF (rows follow PairIndex::pairs).
    std::vector<Eigen::MatrixXd> pair_gradients;
};

[[nodiscard]] CompositeValue composite_likelihood(const IvtModel& model, const PairIndex& index, bool with_gradient,
                                                  bool keep_pair_gradients = false);

[[nodiscard]] double log_composite_likelihood(const IvtModel& model, const CountSeries& x, int K);

/// Same quantity as a plain double loop over (k, i) with no reuse of pair values.
[[nodiscard]] double log_composite_likelihood_naive(const IvtModel& model, const CountSeries& x, int K);

/// Gradient of the log composite likelihood in model parameters.
[[nodiscard]] Eigen::VectorXd cl_gradient(const IvtModel& model, const CountSeries& x, int K);

/// Rows S_i = sum_k d/dtheta log f(x_i, x_{i+k}) for i = 0..n-2, in model parameters.
[[nodiscard]] Eigen::MatrixXd origin_scores(const IvtModel& model, const PairIndex& index);

/// Monte Carlo estimate averaging P(L(A \ A_k) = x1 - C) P(L(A \ A_k) = x2 - C)
/// over M draws of the shared count C.
[[nodiscard]] double pair_pmf_unbiased(const IvtModel& model, int k, long x1, long x2, long M,
                                       std::mt19937_64& rng);

}  // namespace ivt
