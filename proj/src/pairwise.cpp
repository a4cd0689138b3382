#include "ivt/pairwise.hpp"

#include "ivt/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ivt {

namespace {

constexpr double kShareTail = 1e-12;

}  // namespace

PairIndex::PairIndex(const CountSeries& x, int K) : K_(K), n_(x.size()) {
    if (K < 1) throw DomainError("number of lags K must be positive");
    if (K >= n_) throw DomainError("number of lags K must be smaller than the series length");
    min_ = *std::min_element(x.values.begin(), x.values.end());
    max_ = *std::max_element(x.values.begin(), x.values.end());
    pairs_.resize(static_cast<std::size_t>(K));
    slot_.resize(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
        std::map<std::pair<long, long>, int> seen;
        const long m = n_ - k;
        std::vector<std::pair<long, long>> keys(static_cast<std::size_t>(m));
        for (long i = 0; i < m; ++i) {
            long a = x.values[static_cast<std::size_t>(i)];
            long b = x.values[static_cast<std::size_t>(i + k)];
            if (a > b) std::swap(a, b);
            keys[static_cast<std::size_t>(i)] = {a, b};
            seen.emplace(keys[static_cast<std::size_t>(i)], 0);
        }
        auto& list = pairs_[static_cast<std::size_t>(k - 1)];
        for (auto& [key, slot] : seen) {
            slot = static_cast<int>(list.size());
            list.push_back({key.first, key.second, 0.0});
        }
        auto& slots = slot_[static_cast<std::size_t>(k - 1)];
        slots.resize(static_cast<std::size_t>(m));
        for (long i = 0; i < m; ++i) {
            const int s = seen[keys[static_cast<std::size_t>(i)]];
            slots[static_cast<std::size_t>(i)] = s;
            list[static_cast<std::size_t>(s)].count += 1.0;
        }
    }
}

PairContext make_pair_context(const IvtModel& model, int k, long lo, long hi, bool with_derivatives) {
    if (k < 1) throw DomainError("pair lag must be at least 1");
    if (hi < lo) throw DomainError("empty value range for pair context");
    const double h = k * model.delta;
    PairContext ctx;
    ctx.k = k;
    ctx.leb_shared = leb_intersection(model.trawl, h);
    ctx.leb_new = leb_difference(model.trawl, h);
    ctx.nonnegative = is_nonnegative(model.seed);
    ctx.with_derivatives = with_derivatives;
    if (ctx.nonnegative) {
        if (lo < 0) throw DomainError("negative count under a nonnegative seed");
        const long top = std::max(hi, 0L);
        ctx.shared = component_table(model.seed, ctx.leb_shared, 0, top, with_derivatives);
        ctx.fresh = component_table(model.seed, ctx.leb_new, 0, top, with_derivatives);
    } else {
        const auto [cl, ch] = support_window(model.seed, ctx.leb_shared, kShareTail);
        ctx.shared = component_table(model.seed, ctx.leb_shared, cl, ch, with_derivatives);
        ctx.fresh = component_table(model.seed, ctx.leb_new, lo - ch, hi - cl, with_derivatives);
    }
    if (with_derivatives) {
        const LebGradient g = leb_gradients(model.trawl, h);
        ctx.dshared = g.intersection;
        ctx.dnew = g.difference;
    }
    return ctx;
}

double pair_log_pmf(const PairContext& ctx, long x1, long x2, Eigen::VectorXd* grad) {
    long c_lo = 0;
    long c_hi = 0;
    if (ctx.nonnegative) {
        if (x1 < 0 || x2 < 0) return math::kNegInf;
        c_hi = std::min(x1, x2);
    } else {
        c_lo = ctx.shared.lo;
        c_hi = ctx.shared.hi();
    }
    if (!ctx.fresh.contains(x1 - c_hi) || !ctx.fresh.contains(x1 - c_lo) || !ctx.fresh.contains(x2 - c_hi) ||
        !ctx.fresh.contains(x2 - c_lo) || (ctx.nonnegative && !ctx.shared.contains(c_hi))) {
        throw DomainError("pair value outside the range of its pair context");
    }
    const long terms = c_hi - c_lo + 1;
    thread_local std::vector<double> buf;
    buf.resize(static_cast<std::size_t>(terms));
    double peak = math::kNegInf;
    for (long c = c_lo; c <= c_hi; ++c) {
        const double t = ctx.fresh.log_at(x1 - c) + ctx.fresh.log_at(x2 - c) + ctx.shared.log_at(c);
        buf[static_cast<std::size_t>(c - c_lo)] = t;
        peak = std::max(peak, t);
    }
    if (peak == math::kNegInf) {
        if (grad) grad->setConstant(std::numeric_limits<double>::quiet_NaN());
        return math::kNegInf;
    }
    double acc = 0.0;
    for (double& t : buf) {
        t = std::exp(t - peak);
        acc += t;
    }
    const double log_f = peak + std::log(acc);
    if (grad && ctx.with_derivatives) {
        const Eigen::Index r = ctx.shared.dlog_p.cols() - 1;
        const Eigen::Index s = ctx.dshared.size();
        Eigen::VectorXd g_seed = Eigen::VectorXd::Zero(r);
        double g_new = 0.0;
        double g_shared = 0.0;
        for (long c = c_lo; c <= c_hi; ++c) {
            const double w = buf[static_cast<std::size_t>(c - c_lo)] / acc;
            if (w == 0.0) continue;
            const auto f1 = ctx.fresh.dlog_p.row(x1 - c - ctx.fresh.lo);
            const auto f2 = ctx.fresh.dlog_p.row(x2 - c - ctx.fresh.lo);
            const auto sh = ctx.shared.dlog_p.row(c - ctx.shared.lo);
            g_new += w * (f1(0) + f2(0));
            g_shared += w * sh(0);
            g_seed += w * (f1.tail(r) + f2.tail(r) + sh.tail(r)).transpose();
        }
        grad->resize(r + s);
        grad->head(r) = g_seed;
        grad->tail(s) = g_new * ctx.dnew + g_shared * ctx.dshared;
    }
    return log_f;
}

double pair_pmf(const IvtModel& model, int k, long x1, long x2) {
    validate(model);
    if (is_nonnegative(model.seed) && (x1 < 0 || x2 < 0)) return 0.0;
    const PairContext ctx = make_pair_context(model, k, std::min(x1, x2), std::max(x1, x2), false);
    return std::exp(pair_log_pmf(ctx, x1, x2));
}

CompositeValue composite_likelihood(const IvtModel& model, const PairIndex& index, bool with_gradient,
                                    bool keep_pair_gradients) {
    validate(model);
    const int p = parameter_count(model);
    CompositeValue out;
    out.gradient = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd g(p);
    for (int k = 1; k <= index.K(); ++k) {
        const PairContext ctx =
            make_pair_context(model, k, index.min_value(), index.max_value(), with_gradient || keep_pair_gradients);
        const auto& pairs = index.pairs(k);
        Eigen::MatrixXd kept;
        if (keep_pair_gradients) kept.resize(static_cast<Eigen::Index>(pairs.size()), p);
        double lag_sum = 0.0;
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            const auto& pr = pairs[j];
            const double lp = pair_log_pmf(ctx, pr.a, pr.b, with_gradient || keep_pair_gradients ? &g : nullptr);
            if (lp == math::kNegInf) {
                out.finite = false;
                out.value = math::kNegInf;
                out.diagnostic = "zero pair probability at lag " + std::to_string(k) + " for (" +
                                 std::to_string(pr.a) + ", " + std::to_string(pr.b) + ")";
                out.gradient.setConstant(std::numeric_limits<double>::quiet_NaN());
                return out;
            }
            lag_sum += pr.count * lp;
            if (with_gradient) out.gradient += pr.count * g;
            if (keep_pair_gradients) kept.row(static_cast<Eigen::Index>(j)) = g.transpose();
        }
        out.value += lag_sum;
        if (keep_pair_gradients) out.pair_gradients.push_back(std::move(kept));
    }
    if (!std::isfinite(out.value)) {
        throw EvaluationError("non-finite composite likelihood");
    }
    return out;
}

double log_composite_likelihood(const IvtModel& model, const CountSeries& x, int K) {
    check_support(model.seed, x);
    return composite_likelihood(model, PairIndex(x, K), false).value;
}

double log_composite_likelihood_naive(const IvtModel& model, const CountSeries& x, int K) {
    check_support(model.seed, x);
    const long n = x.size();
    if (K < 1 || K >= n) throw DomainError("number of lags K must lie in [1, n)");
    double total = 0.0;
    for (int k = 1; k <= K; ++k) {
        for (long i = 0; i + k < n; ++i) {
            total += std::log(pair_pmf(model, k, x.values[static_cast<std::size_t>(i + k)],
                                       x.values[static_cast<std::size_t>(i)]));
        }
    }
    return total;
}

Eigen::VectorXd cl_gradient(const IvtModel& model, const CountSeries& x, int K) {
    check_support(model.seed, x);
    const CompositeValue v = composite_likelihood(model, PairIndex(x, K), true);
    if (!v.finite) throw EvaluationError("gradient undefined: " + v.diagnostic);
    return v.gradient;
}

Eigen::MatrixXd origin_scores(const IvtModel& model, const PairIndex& index) {
    const CompositeValue v = composite_likelihood(model, index, false, true);
    if (!v.finite) throw EvaluationError("scores undefined: " + v.diagnostic);
    const long n = index.n();
    const int p = parameter_count(model);
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n - 1, p);
    for (int k = 1; k <= index.K(); ++k) {
        const Eigen::MatrixXd& g = v.pair_gradients[static_cast<std::size_t>(k - 1)];
        for (long i = 0; i + k < n; ++i) scores.row(i) += g.row(index.pair_of(k, i));
    }
    return scores;
}

double pair_pmf_unbiased(const IvtModel& model, int k, long x1, long x2, long M, std::mt19937_64& rng) {
    validate(model);
    if (M < 1) throw DomainError("number of Monte Carlo draws M must be positive");
    if (k < 1) throw DomainError("pair lag must be at least 1");
    const double h = k * model.delta;
    const double leb_shared = leb_intersection(model.trawl, h);
    const double leb_new = leb_difference(model.trawl, h);
    const CompoundPoissonRep rep = compound_poisson_rep(model.seed);
    double total = 0.0;
    for (long j = 0; j < M; ++j) {
        const long c = sample_on_set(rep, leb_shared, rng);
        total += pmf_on_set(model.seed, leb_new, x1 - c) * pmf_on_set(model.seed, leb_new, x2 - c);
    }
    return total / static_cast<double>(M);
}

}  // namespace ivt
