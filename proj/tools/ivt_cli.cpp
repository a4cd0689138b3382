#include "ivt/evaluate.hpp"
#include "ivt/gmm.hpp"
#include "ivt/inference.hpp"
#include "ivt/io.hpp"
#include "ivt/parallel.hpp"
#include "ivt/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using ivt::Family;

struct Output {
    std::ofstream file;
    std::ostream* stream{&std::cout};

    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path, std::ios::binary);
        if (!file) throw ivt::DomainError("cannot open output file " + path);
        stream = &file;
    }
    std::ostream& operator*() { return *stream; }
};

std::vector<Family> parse_families(const std::vector<std::string>& items) {
    std::vector<Family> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string tag;
        while (std::getline(ss, tag, ',')) {
            if (!tag.empty()) out.push_back(ivt::parse_family(tag));
        }
    }
    if (out.empty()) throw ivt::DomainError("no families given");
    return out;
}

// "20" means 1..20, "a..b" a range, "1,5,10" a list
std::vector<int> parse_horizons(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int a = std::stoi(text.substr(0, dots));
        const int b = std::stoi(text.substr(dots + 2));
        for (int h = a; h <= b; ++h) out.push_back(h);
    } else if (text.find(',') != std::string::npos) {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    } else {
        const int b = std::stoi(text);
        for (int h = 1; h <= b; ++h) out.push_back(h);
    }
    for (int h : out) {
        if (h < 1) throw ivt::DomainError("forecast horizons must be positive");
    }
    if (out.empty()) throw ivt::DomainError("no forecast horizons given");
    return out;
}

std::optional<double> optional_delta(double delta) {
    return delta > 0.0 ? std::optional<double>(delta) : std::nullopt;
}

struct EstimateFlags {
    std::string family;
    int K{0};
    double delta{0.0};
    std::string input;
    std::string output{"-"};
    std::string method{"mcl"};
    std::string inference{"sim"};
    long B{500};
    long N{500};
    int q{-1};
    int m{10};
    std::uint64_t seed{1};
    int workers{0};
};

ivt::InferenceOptions inference_options(const EstimateFlags& f) {
    ivt::InferenceOptions o;
    o.method = f.inference == "hac" ? ivt::VMethod::Hac : ivt::VMethod::Simulation;
    o.B = f.B;
    o.N = f.N;
    o.q = f.q;
    o.seed = f.seed;
    o.workers = f.workers > 0 ? f.workers : ivt::default_workers();
    return o;
}

// MCL fit with optional inference, as a JSON document. Returns convergence.
bool fit_document(Family family, const ivt::CountSeries& x, const EstimateFlags& f, nlohmann::ordered_json& doc) {
    ivt::FitOptions opts;
    opts.K = f.K;
    opts.jitter_seed = f.seed;
    const ivt::FitResult fit = ivt::fit_mcl(family, x, opts);
    std::optional<ivt::Inference> inf;
    std::vector<std::string> extra;
    if (f.inference != "none" && std::isfinite(fit.cl)) {
        try {
            inf = ivt::infer(fit, x, inference_options(f));
        } catch (const std::exception& e) {
            extra.push_back(std::string("inference failed: ") + e.what());
        }
    }
    doc = ivt::fit_to_json(fit, "mcl", inf ? &*inf : nullptr);
    for (const auto& e : extra) doc["diagnostics"].push_back(e);
    return fit.converged;
}

int run_simulate(const std::string& family_tag, const std::string& theta_text, double delta, long n,
                 std::uint64_t seed, const std::string& output, double tail_eps) {
    const Family family = ivt::parse_family(family_tag);
    const ivt::IvtModel model = ivt::make_model(family, ivt::parse_theta(family, theta_text), delta);
    const ivt::CountSeries x = ivt::simulate_path(model, n, seed, tail_eps);
    Output out(output);
    ivt::write_series_csv(x, *out);
    return 0;
}

int run_estimate(const EstimateFlags& f) {
    const Family family = ivt::parse_family(f.family);
    const ivt::CountSeries x = ivt::read_series_csv_file(f.input, optional_delta(f.delta));
    nlohmann::ordered_json doc;
    bool converged = false;
    if (f.method == "mcl") {
        converged = fit_document(family, x, f, doc);
    } else {
        ivt::GmmResult g;
        if (f.method == "gmm") {
            const int lags = f.K > 0 ? std::max(f.K, ivt::trawl_parameter_count(family))
                                     : (family.trawl == ivt::TrawlKind::Exp ? 1 : 10);
            g = ivt::fit_gmm_two_step(family, x, lags);
        } else {
            g = ivt::fit_gmm_full(family, x, f.m);
        }
        ivt::FitResult fit;
        fit.family = family;
        fit.delta = x.delta;
        fit.n = x.size();
        fit.K = f.K > 0 ? f.K : ivt::default_K(family);
        fit.converged = g.ok && !g.boundary;
        fit.theta = g.ok ? g.theta : Eigen::VectorXd::Constant(ivt::parameter_count(family), NAN);
        fit.cl = NAN;
        fit.gradient_norm = NAN;
        if (g.ok) {
            try {
                fit.cl = ivt::log_composite_likelihood(ivt::make_model(family, g.theta, x.delta), x, fit.K);
            } catch (const std::exception&) {
            }
        }
        if (!g.diagnostic.empty()) fit.diagnostics.push_back(g.diagnostic);
        converged = fit.converged;
        if (!g.ok) throw ivt::EvaluationError("moment estimation failed: " + g.diagnostic);
        doc = ivt::fit_to_json(fit, f.method, nullptr);
    }
    Output out(f.output);
    *out << doc.dump(2) << '\n';
    return converged ? 0 : 1;
}

int run_select(const EstimateFlags& f, const std::vector<std::string>& family_items) {
    const std::vector<Family> families = parse_families(family_items);
    const ivt::CountSeries x = ivt::read_series_csv_file(f.input, optional_delta(f.delta));
    EstimateFlags g = f;
    if (g.K <= 0) g.K = 10;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    bool all = true;
    for (const Family& family : families) {
        nlohmann::ordered_json doc;
        try {
            all = fit_document(family, x, g, doc) && all;
        } catch (const std::exception& e) {
            all = false;
            doc = nlohmann::ordered_json::object();
            doc["family"] = family.tag();
            doc["converged"] = false;
            doc["CL"] = nullptr;
            doc["CLAIC"] = nullptr;
            doc["CLBIC"] = nullptr;
            doc["diagnostics"] = {std::string("fit failed: ") + e.what()};
        }
        rows.push_back(doc);
    }
    nlohmann::ordered_json ranking = nlohmann::ordered_json::object();
    for (const char* crit : {"CL", "CLAIC", "CLBIC"}) {
        std::vector<std::pair<double, std::string>> scored;
        for (const auto& row : rows) {
            if (row.contains(crit) && row[crit].is_number()) scored.emplace_back(row[crit].get<double>(), row["family"]);
        }
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        nlohmann::ordered_json order = nlohmann::ordered_json::array();
        for (const auto& s : scored) order.push_back(s.second);
        ranking[crit] = order;
    }
    nlohmann::ordered_json doc;
    doc["K"] = g.K;
    doc["n"] = x.size();
    doc["models"] = rows;
    doc["ranking"] = ranking;
    nlohmann::ordered_json best = nlohmann::ordered_json::object();
    for (auto& [crit, order] : ranking.items()) best[crit] = order.empty() ? nlohmann::ordered_json(nullptr) : order[0];
    doc["best"] = best;
    Output out(f.output);
    *out << doc.dump(2) << '\n';
    return all ? 0 : 1;
}

int run_forecast(const std::string& input, double delta, const std::string& model_path, const std::string& horizons,
                 const std::string& rule_name, long M, bool full_pmf, bool all_origins, const std::string& output) {
    std::ifstream mf(model_path);
    if (!mf) throw ivt::DomainError("cannot open model file " + model_path);
    const ivt::FittedModel fm = ivt::fitted_model_from_json(nlohmann::json::parse(mf));
    const ivt::CountSeries x = ivt::read_series_csv_file(input, optional_delta(delta > 0.0 ? delta : fm.delta));
    if (std::abs(x.delta - fm.delta) > 1e-9 * fm.delta) {
        throw ivt::DomainError("series spacing differs from the model's delta");
    }
    const ivt::IvtModel model = ivt::make_model(fm.family, fm.theta, fm.delta);
    const ivt::PointRule rule = ivt::parse_point_rule(rule_name);
    const std::vector<int> hs = parse_horizons(horizons);
    const std::vector<double> levels{0.05, 0.25, 0.5, 0.75, 0.95};
    Output out(output);
    *out << "origin,t,x_origin,h,point,q05,q25,q50,q75,q95";
    if (full_pmf) {
        for (long k = 0; k <= M; ++k) *out << ",p" << k;
    }
    *out << '\n';
    const long first = all_origins ? 0 : x.size() - 1;
    for (long i = first; i < x.size(); ++i) {
        const long x_t = x.values[static_cast<std::size_t>(i)];
        for (int h : hs) {
            const ivt::PredictivePmf pmf = ivt::predictive_pmf(model, h * x.delta, x_t, M);
            *out << (i + 1) << ',' << ivt::format_double(x.origin + static_cast<double>(i) * x.delta) << ',' << x_t << ','
                 << h << ',' << ivt::format_double(ivt::point_forecast(pmf, rule));
            for (double lv : levels) *out << ',' << ivt::predictive_quantile(pmf, lv);
            if (full_pmf) {
                for (long k = 0; k <= M; ++k) *out << ',' << ivt::format_double(pmf.p(k));
            }
            *out << '\n';
        }
    }
    return 0;
}

int run_backtest(const std::string& input, double delta, const std::vector<std::string>& family_items,
                 const std::string& benchmark_tag, const ivt::BacktestConfig& config, const std::string& output,
                 const std::string& dm_output) {
    const std::vector<Family> families = parse_families(family_items);
    const ivt::CountSeries x = ivt::read_series_csv_file(input, optional_delta(delta));
    const ivt::BacktestResult res = ivt::backtest(families, x, config);
    std::size_t bench = 0;
    if (!benchmark_tag.empty()) {
        const Family b = ivt::parse_family(benchmark_tag);
        const auto it = std::find(families.begin(), families.end(), b);
        if (it == families.end()) throw ivt::DomainError("benchmark must be one of the listed families");
        bench = static_cast<std::size_t>(it - families.begin());
    }
    {
        Output out(output);
        *out << "model,horizon,n_oos,MAE,MSE,logS,RPS,ratio_MAE,ratio_MSE,ratio_logS,ratio_RPS\n";
        for (const auto& mb : res.models) {
            for (int h = 1; h <= config.h_max; ++h) {
                const auto& s = mb.summary[static_cast<std::size_t>(h - 1)];
                const auto& b = res.models[bench].summary[static_cast<std::size_t>(h - 1)];
                *out << mb.family.tag() << ',' << h << ',' << s.count << ',' << ivt::format_double(s.mae) << ','
                     << ivt::format_double(s.mse) << ',' << ivt::format_double(s.logs) << ','
                     << ivt::format_double(s.rps) << ',' << ivt::format_double(s.mae / b.mae) << ','
                     << ivt::format_double(s.mse / b.mse) << ',' << ivt::format_double(s.logs / b.logs) << ','
                     << ivt::format_double(s.rps / b.rps) << '\n';
            }
        }
    }
    if (!dm_output.empty()) {
        Output out(dm_output);
        *out << "metric,horizon,model_a,model_b,statistic,p_value\n";
        for (auto metric : {ivt::LossMetric::MAE, ivt::LossMetric::MSE, ivt::LossMetric::LogS, ivt::LossMetric::RPS}) {
            for (int h = 1; h <= config.h_max; ++h) {
                for (const auto& a : res.models) {
                    for (const auto& b : res.models) {
                        if (a.family == b.family) continue;
                        const auto dm = ivt::diebold_mariano(
                            ivt::metric_series(a.terms[static_cast<std::size_t>(h - 1)], metric),
                            ivt::metric_series(b.terms[static_cast<std::size_t>(h - 1)], metric), h);
                        *out << ivt::metric_name(metric) << ',' << h << ',' << a.family.tag() << ',' << b.family.tag()
                             << ',' << ivt::format_double(dm.statistic) << ',' << ivt::format_double(dm.p_value)
                             << '\n';
                    }
                }
            }
        }
    }
    bool all = true;
    for (const auto& mb : res.models) {
        for (const auto& d : mb.diagnostics) std::cerr << mb.family.tag() << ": " << d << '\n';
        all = all && mb.all_converged;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integer-valued trawl processes: simulation, composite-likelihood estimation and forecasting"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate an equidistant sample path (CSV t,x)");
    std::string s_family, s_theta, s_output = "-";
    double s_delta = 0.0, s_tail = 1e-6;
    long s_n = 0;
    std::uint64_t s_seed = 0;
    sim->add_option("--family", s_family, "<poisson|nb|skellam>-<exp|supexp|ig|gamma>")->required();
    sim->add_option("--theta", s_theta, "Parameters as name=value,...")->required();
    sim->add_option("--delta", s_delta, "Grid step")->required()->check(CLI::PositiveNumber);
    sim->add_option("--n", s_n, "Number of observations")->required();
    sim->add_option("--seed", s_seed, "RNG seed")->required();
    sim->add_option("--output", s_output, "Output CSV (default stdout)");
    sim->add_option("--tail-eps", s_tail, "Relative tolerance of the trawl-curve inversion");

    // estimate
    EstimateFlags ef;
    auto* est = app.add_subcommand("estimate", "Fit one family (JSON)");
    est->add_option("--family", ef.family)->required();
    est->add_option("--K", ef.K, "Number of pairwise lags (default 1 for exp trawls, else 10)");
    est->add_option("--delta", ef.delta, "Grid step (needed when the CSV has no t column)");
    est->add_option("--input", ef.input)->required();
    est->add_option("--output", ef.output);
    est->add_option("--method", ef.method)->check(CLI::IsMember({"mcl", "gmm", "gmm-full"}));
    est->add_option("--inference", ef.inference)->check(CLI::IsMember({"sim", "hac", "none"}));
    est->add_option("--B", ef.B, "Simulated paths for V (default 500)");
    est->add_option("--N", ef.N, "Simulated path length for V (default 500)");
    est->add_option("--q", ef.q, "HAC lags (default ceil(n^(1/3)))");
    est->add_option("--m", ef.m, "Autocovariance lags for gmm-full (default 10)");
    est->add_option("--seed", ef.seed, "RNG seed for simulation-based inference");
    est->add_option("--workers", ef.workers, "Worker threads (default IVT_WORKERS or core count)");

    // select
    EstimateFlags sf;
    std::vector<std::string> sel_families;
    auto* sel = app.add_subcommand("select", "Fit several families and rank them by CL, CLAIC and CLBIC");
    sel->add_option("--families", sel_families, "Comma-separated family tags")->required();
    sel->add_option("--K", sf.K, "Number of pairwise lags shared by all families (default 10)");
    sel->add_option("--delta", sf.delta);
    sel->add_option("--input", sf.input)->required();
    sel->add_option("--output", sf.output);
    sel->add_option("--inference", sf.inference)->check(CLI::IsMember({"sim", "hac"}));
    sel->add_option("--B", sf.B);
    sel->add_option("--N", sf.N);
    sel->add_option("--q", sf.q);
    sel->add_option("--seed", sf.seed);
    sel->add_option("--workers", sf.workers);

    // forecast
    auto* fc = app.add_subcommand("forecast", "Predictive distributions from a fitted model (CSV)");
    std::string f_input, f_model, f_h = "1..20", f_rule = "mean", f_output = "-";
    double f_delta = 0.0;
    long f_M = 60;
    bool f_full = false, f_all = false;
    fc->add_option("--input", f_input)->required();
    fc->add_option("--model", f_model, "Fit JSON written by estimate")->required();
    fc->add_option("--h-steps", f_h, "Horizons: N (1..N), a..b, or a list");
    fc->add_option("--rule", f_rule)->check(CLI::IsMember({"mean", "mode", "median"}));
    fc->add_option("--M", f_M, "Support cap of the predictive PMF (default 60)");
    fc->add_option("--delta", f_delta);
    fc->add_flag("--full-pmf", f_full, "Append the predictive PMF over 0..M");
    fc->add_flag("--all-origins", f_all, "Forecast from every observation instead of the last");
    fc->add_option("--output", f_output);

    // backtest
    auto* bt = app.add_subcommand("backtest", "Expanding-window forecast comparison (CSV)");
    std::string b_input, b_benchmark, b_output = "-", b_dm, b_rule = "mean";
    std::vector<std::string> b_families;
    double b_delta = 0.0;
    ivt::BacktestConfig bc;
    std::uint64_t b_seed = 0;
    bt->add_option("--input", b_input)->required();
    bt->add_option("--families", b_families)->required();
    bt->add_option("--benchmark", b_benchmark, "Family used as the denominator of loss ratios (default first)");
    bt->add_option("--n1", bc.n1, "Initial in-sample size")->required();
    bt->add_option("--h-max", bc.h_max, "Largest horizon (default 20)");
    bt->add_option("--stride", bc.stride, "Re-fit every this many origins (default 24)");
    bt->add_option("--rule", b_rule)->check(CLI::IsMember({"mean", "mode", "median"}));
    bt->add_option("--M", bc.M_cap);
    bt->add_option("--K", bc.K);
    bt->add_option("--delta", b_delta);
    bt->add_option("--seed", b_seed, "RNG seed")->required();
    bt->add_option("--output", b_output, "Loss table CSV (default stdout)");
    bt->add_option("--dm-output", b_dm, "Diebold-Mariano table CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return run_simulate(s_family, s_theta, s_delta, s_n, s_seed, s_output, s_tail);
        if (*est) return run_estimate(ef);
        if (*sel) return run_select(sf, sel_families);
        if (*fc) return run_forecast(f_input, f_delta, f_model, f_h, f_rule, f_M, f_full, f_all, f_output);
        if (*bt) {
            bc.rule = ivt::parse_point_rule(b_rule);
            (void)b_seed;
            return run_backtest(b_input, b_delta, b_families, b_benchmark, bc, b_output, b_dm);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
