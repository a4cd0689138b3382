#pragma once

#include "ivt/estimate.hpp"
#include "ivt/forecast.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ivt {

struct LossTerms {
    double abs_error{0.0};
    double sq_error{0.0};
    double log_score{0.0};
    double rps{0.0};
    bool floored{false};
};

/// sum_{k=0}^{cap} (F(k) - 1{realized <= k})^2.
[[nodiscard]] double ranked_probability_score(const PredictivePmf& pmf, long realized);

/// -log P(realized), with the probability floored at 1e-300.
[[nodiscard]] double log_score(const PredictivePmf& pmf, long realized, bool* floored = nullptr);

[[nodiscard]] LossTerms forecast_losses(const PredictivePmf& pmf, double point, long realized);

struct LossSummary {
    double mae{0.0};
    double mse{0.0};
    double logs{0.0};
    double rps{0.0};
    long count{0};
    long floored{0};
};

[[nodiscard]] LossSummary summarize(const std::vector<LossTerms>& terms);

enum class LossMetric { MAE, MSE, LogS, RPS };

[[nodiscard]] const char* metric_name(LossMetric metric);

[[nodiscard]] std::vector<double> metric_series(const std::vector<LossTerms>& terms, LossMetric metric);

struct DmResult {
    double statistic{0.0};
    double p_value{0.5};
    bool defined{true};
    std::string note;
};

/// d = loss_a - loss_b; statistic mean(d) / sqrt(LRV(d) / n) with a Bartlett
/// long-run variance of lag h - 1. p is the upper normal tail, so small p says
/// model b forecasts better than model a.
[[nodiscard]] DmResult diebold_mariano(const std::vector<double>& loss_a, const std::vector<double>& loss_b, int h);

struct BacktestConfig {
    long n1{0};
    int h_max{20};
    long stride{24};
    PointRule rule{PointRule::Mean};
    long M_cap{60};
    int K{0};  // 0 selects default_K per family
};

struct ModelBacktest {
    Family family;
    /// terms[h-1][j] is the loss of the j-th forecast origin at horizon h.
    std::vector<std::vector<LossTerms>> terms;
    std::vector<LossSummary> summary;
    std::vector<std::string> diagnostics;
    long refits{0};
    bool all_converged{true};
};

struct BacktestResult {
    std::vector<ModelBacktest> models;
    long origins{0};
};

/// Expanding-window backtest. Forecast origins are t = n1, ..., n - h_max - 1
/// (number of in-sample observations). Models are re-fitted every `stride`
/// origins, warm-started from the previous fit.
[[nodiscard]] BacktestResult backtest(const std::vector<Family>& families, const CountSeries& x,
                                      const BacktestConfig& config);

}  // namespace ivt
