#include "ivt/trawl.hpp"

#include <cmath>
#include <set>

namespace ivt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_lag(double h) {
    if (!(h >= 0.0)) throw DomainError("trawl lag must be nonnegative");
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

// alpha_h = sqrt(1 + 2h/gamma^2); 1 - alpha_h evaluated as -(2h/gamma^2) / (1 + alpha_h).
double ig_one_minus_alpha(const IgTrawl& t, double h) {
    const double z = 2.0 * h / (t.gamma * t.gamma);
    return -z / (1.0 + std::sqrt(1.0 + z));
}

}  // namespace

void validate(const TrawlSpec& trawl) {
    std::visit(overloaded{
                   [](const ExpTrawl& t) {
                       if (!positive(t.lambda)) throw DomainError("Exp trawl requires lambda > 0");
                   },
                   [](const SupExpTrawl& t) {
                       if (t.weights.empty() || t.weights.size() != t.rates.size()) {
                           throw DomainError("SupExp trawl requires q >= 1 matching weights and rates");
                       }
                       for (std::size_t i = 0; i < t.weights.size(); ++i) {
                           if (!positive(t.weights[i]) || !positive(t.rates[i])) {
                               throw DomainError("SupExp trawl requires positive weights and rates");
                           }
                       }
                       if (std::set<double>(t.rates.begin(), t.rates.end()).size() != t.rates.size()) {
                           throw DomainError("SupExp trawl requires distinct rates");
                       }
                   },
                   [](const IgTrawl& t) {
                       if (!positive(t.delta) || !positive(t.gamma)) throw DomainError("IG trawl requires delta, gamma > 0");
                   },
                   [](const GammaTrawl& t) {
                       if (!positive(t.H) || !positive(t.alpha)) throw DomainError("Gamma trawl requires H, alpha > 0");
                   },
               },
               trawl);
}

int parameter_count(const TrawlSpec& trawl) {
    return std::visit(overloaded{
                          [](const ExpTrawl&) { return 1; },
                          [](const SupExpTrawl& t) { return static_cast<int>(2 * t.weights.size()); },
                          [](const IgTrawl&) { return 2; },
                          [](const GammaTrawl&) { return 2; },
                      },
                      trawl);
}

Eigen::VectorXd parameters(const TrawlSpec& trawl) {
    return std::visit(overloaded{
                          [](const ExpTrawl& t) { return Eigen::VectorXd{{t.lambda}}; },
                          [](const SupExpTrawl& t) {
                              const auto q = static_cast<Eigen::Index>(t.weights.size());
                              Eigen::VectorXd v(2 * q);
                              for (Eigen::Index i = 0; i < q; ++i) {
                                  v(i) = t.weights[i];
                                  v(q + i) = t.rates[i];
                              }
                              return v;
                          },
                          [](const IgTrawl& t) { return Eigen::VectorXd{{t.delta, t.gamma}}; },
                          [](const GammaTrawl& t) { return Eigen::VectorXd{{t.H, t.alpha}}; },
                      },
                      trawl);
}

TrawlSpec with_parameters(const TrawlSpec& like, const Eigen::VectorXd& params) {
    if (params.size() != parameter_count(like)) throw DomainError("trawl parameter vector has wrong length");
    return std::visit(overloaded{
                          [&](const ExpTrawl&) -> TrawlSpec { return ExpTrawl{params(0)}; },
                          [&](const SupExpTrawl& t) -> TrawlSpec {
                              const auto q = static_cast<Eigen::Index>(t.weights.size());
                              SupExpTrawl out;
                              for (Eigen::Index i = 0; i < q; ++i) {
                                  out.weights.push_back(params(i));
                                  out.rates.push_back(params(q + i));
                              }
                              return out;
                          },
                          [&](const IgTrawl&) -> TrawlSpec { return IgTrawl{params(0), params(1)}; },
                          [&](const GammaTrawl&) -> TrawlSpec { return GammaTrawl{params(0), params(1)}; },
                      },
                      like);
}

double trawl_height(const TrawlSpec& trawl, double r) {
    check_lag(r);
    return std::visit(overloaded{
                          [&](const ExpTrawl& t) { return std::exp(-t.lambda * r); },
                          [&](const SupExpTrawl& t) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < t.weights.size(); ++i) s += t.weights[i] * std::exp(-t.rates[i] * r);
                              return s;
                          },
                          [&](const IgTrawl& t) {
                              const double one_minus = ig_one_minus_alpha(t, r);
                              return std::exp(t.delta * t.gamma * one_minus) / (1.0 - one_minus);
                          },
                          [&](const GammaTrawl& t) { return std::exp(-(t.H + 1.0) * std::log1p(r / t.alpha)); },
                      },
                      trawl);
}

double leb_full(const TrawlSpec& trawl) {
    return std::visit(overloaded{
                          [](const ExpTrawl& t) { return 1.0 / t.lambda; },
                          [](const SupExpTrawl& t) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < t.weights.size(); ++i) s += t.weights[i] / t.rates[i];
                              return s;
                          },
                          [](const IgTrawl& t) { return t.gamma / t.delta; },
                          [](const GammaTrawl& t) { return t.alpha / t.H; },
                      },
                      trawl);
}

double leb_intersection(const TrawlSpec& trawl, double h) {
    check_lag(h);
    return std::visit(overloaded{
                          [&](const ExpTrawl& t) { return std::exp(-t.lambda * h) / t.lambda; },
                          [&](const SupExpTrawl& t) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < t.weights.size(); ++i) {
                                  s += t.weights[i] * std::exp(-t.rates[i] * h) / t.rates[i];
                              }
                              return s;
                          },
                          [&](const IgTrawl& t) {
                              return t.gamma / t.delta * std::exp(t.delta * t.gamma * ig_one_minus_alpha(t, h));
                          },
                          [&](const GammaTrawl& t) { return t.alpha / t.H * std::exp(-t.H * std::log1p(h / t.alpha)); },
                      },
                      trawl);
}

double leb_difference(const TrawlSpec& trawl, double h) {
    check_lag(h);
    return std::visit(overloaded{
                          [&](const ExpTrawl& t) { return -std::expm1(-t.lambda * h) / t.lambda; },
                          [&](const SupExpTrawl& t) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < t.weights.size(); ++i) {
                                  s += -t.weights[i] * std::expm1(-t.rates[i] * h) / t.rates[i];
                              }
                              return s;
                          },
                          [&](const IgTrawl& t) {
                              return -t.gamma / t.delta * std::expm1(t.delta * t.gamma * ig_one_minus_alpha(t, h));
                          },
                          [&](const GammaTrawl& t) {
                              return -t.alpha / t.H * std::expm1(-t.H * std::log1p(h / t.alpha));
                          },
                      },
                      trawl);
}

double acf(const TrawlSpec& trawl, double h) {
    check_lag(h);
    return std::visit(overloaded{
                          [&](const ExpTrawl& t) { return std::exp(-t.lambda * h); },
                          [&](const SupExpTrawl&) { return leb_intersection(trawl, h) / leb_full(trawl); },
                          [&](const IgTrawl& t) { return std::exp(t.delta * t.gamma * ig_one_minus_alpha(t, h)); },
                          [&](const GammaTrawl& t) { return std::exp(-t.H * std::log1p(h / t.alpha)); },
                      },
                      trawl);
}

LebGradient leb_gradients(const TrawlSpec& trawl, double h) {
    check_lag(h);
    LebGradient g;
    std::visit(overloaded{
                   [&](const ExpTrawl& t) {
                       const double l = t.lambda;
                       const double e = std::exp(-l * h);
                       g.full = Eigen::VectorXd{{-1.0 / (l * l)}};
                       g.intersection = Eigen::VectorXd{{-e / l * (1.0 / l + h)}};
                   },
                   [&](const SupExpTrawl& t) {
                       const auto q = static_cast<Eigen::Index>(t.weights.size());
                       g.full.resize(2 * q);
                       g.intersection.resize(2 * q);
                       for (Eigen::Index i = 0; i < q; ++i) {
                           const double w = t.weights[i];
                           const double l = t.rates[i];
                           const double e = std::exp(-l * h);
                           g.full(i) = 1.0 / l;
                           g.full(q + i) = -w / (l * l);
                           g.intersection(i) = e / l;
                           g.intersection(q + i) = -w * e / l * (1.0 / l + h);
                       }
                   },
                   [&](const IgTrawl& t) {
                       const double dl = t.delta;
                       const double gm = t.gamma;
                       const double one_minus = ig_one_minus_alpha(t, h);
                       const double alpha_h = 1.0 - one_minus;
                       const double inter = gm / dl * std::exp(dl * gm * one_minus);
                       g.full = Eigen::VectorXd{{-gm / (dl * dl), 1.0 / dl}};
                       g.intersection = Eigen::VectorXd{
                           {inter * (gm * one_minus - 1.0 / dl),
                            inter * (1.0 / gm + dl * one_minus + 2.0 * dl * h / (gm * gm * alpha_h))}};
                   },
                   [&](const GammaTrawl& t) {
                       const double H = t.H;
                       const double a = t.alpha;
                       const double lg = std::log1p(h / a);
                       const double inter = a / H * std::exp(-H * lg);
                       g.full = Eigen::VectorXd{{-a / (H * H), 1.0 / H}};
                       g.intersection = Eigen::VectorXd{{-inter * (1.0 / H + lg), inter * (1.0 / a + H * h / (a * (a + h)))}};
                   },
               },
               trawl);
    g.difference = g.full - g.intersection;
    return g;
}

Eigen::VectorXd acf_gradient(const TrawlSpec& trawl, double h) {
    const LebGradient g = leb_gradients(trawl, h);
    const double full = leb_full(trawl);
    const double inter = leb_intersection(trawl, h);
    return (g.intersection * full - g.full * inter) / (full * full);
}

bool is_long_memory(const TrawlSpec& trawl) {
    const auto* gamma = std::get_if<GammaTrawl>(&trawl);
    return gamma != nullptr && gamma->H <= 1.0;
}

}  // namespace ivt
