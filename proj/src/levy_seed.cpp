#include "ivt/levy_seed.hpp"

#include "ivt/math.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ivt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double checked(double value, const char* what) {
    if (std::isnan(value)) {
        throw EvaluationError(std::string("non-finite value in ") + what);
    }
    return value;
}

double poisson_log_pmf(double mean, long x) {
    if (x < 0) return math::kNegInf;
    if (mean == 0.0) return x == 0 ? 0.0 : math::kNegInf;
    return static_cast<double>(x) * std::log(mean) - mean - math::log_factorial(x);
}

double negbin_log_pmf(double size, double p, long x) {
    if (x < 0) return math::kNegInf;
    if (size == 0.0) return x == 0 ? 0.0 : math::kNegInf;
    const double xd = static_cast<double>(x);
    return std::lgamma(size + xd) - std::lgamma(size) - math::log_factorial(x) +
           size * std::log1p(-p) + xd * std::log(p);
}

double skellam_log_pmf(double a, double b, long k) {
    if (a == 0.0 && b == 0.0) return k == 0 ? 0.0 : math::kNegInf;
    if (a == 0.0) return poisson_log_pmf(b, -k);
    if (b == 0.0) return poisson_log_pmf(a, k);
    const double kd = static_cast<double>(k);
    return -(a + b) + 0.5 * kd * (std::log(a) - std::log(b)) +
           log_bessel_i(std::labs(k), 2.0 * std::sqrt(a * b));
}

}  // namespace

void validate(const LevySeed& seed) {
    std::visit(overloaded{
                   [](const PoissonSeed& s) {
                       if (!(s.nu > 0.0) || !std::isfinite(s.nu)) throw DomainError("Poisson seed requires nu > 0");
                   },
                   [](const NegBinSeed& s) {
                       if (!(s.m > 0.0) || !std::isfinite(s.m)) throw DomainError("NB seed requires m > 0");
                       if (!(s.p > 0.0 && s.p < 1.0)) throw DomainError("NB seed requires 0 < p < 1");
                   },
                   [](const SkellamSeed& s) {
                       if (!(s.psi_plus > 0.0) || !(s.psi_minus > 0.0) || !std::isfinite(s.psi_plus) ||
                           !std::isfinite(s.psi_minus)) {
                           throw DomainError("Skellam seed requires psi+ > 0 and psi- > 0");
                       }
                   },
               },
               seed);
}

bool is_nonnegative(const LevySeed& seed) { return !std::holds_alternative<SkellamSeed>(seed); }

int parameter_count(const LevySeed& seed) { return std::holds_alternative<PoissonSeed>(seed) ? 1 : 2; }

Eigen::VectorXd parameters(const LevySeed& seed) {
    return std::visit(overloaded{
                          [](const PoissonSeed& s) { return Eigen::VectorXd{{s.nu}}; },
                          [](const NegBinSeed& s) { return Eigen::VectorXd{{s.m, s.p}}; },
                          [](const SkellamSeed& s) { return Eigen::VectorXd{{s.psi_plus, s.psi_minus}}; },
                      },
                      seed);
}

double log_pmf_on_set(const LevySeed& seed, double leb, long x) {
    if (std::isnan(leb)) throw EvaluationError("Lebesgue measure is NaN");
    if (!(leb >= 0.0)) throw DomainError("Lebesgue measure must be nonnegative");
    if (leb == 0.0) return x == 0 ? 0.0 : math::kNegInf;
    const double value = std::visit(overloaded{
                                        [&](const PoissonSeed& s) { return poisson_log_pmf(s.nu * leb, x); },
                                        [&](const NegBinSeed& s) { return negbin_log_pmf(s.m * leb, s.p, x); },
                                        [&](const SkellamSeed& s) {
                                            return skellam_log_pmf(s.psi_plus * leb, s.psi_minus * leb, x);
                                        },
                                    },
                                    seed);
    return checked(value, "log_pmf_on_set");
}

double pmf_on_set(const LevySeed& seed, double leb, long x) { return std::exp(log_pmf_on_set(seed, leb, x)); }

double cumulant(const LevySeed& seed, int order) {
    if (order < 1 || order > 4) throw DomainError("cumulant order must be in 1..4");
    return std::visit(overloaded{
                          [&](const PoissonSeed& s) { return s.nu; },
                          [&](const NegBinSeed& s) {
                              const double q = 1.0 - s.p;
                              switch (order) {
                                  case 1: return s.m * s.p / q;
                                  case 2: return s.m * s.p / (q * q);
                                  case 3: return s.m * s.p * (1.0 + s.p) / (q * q * q);
                                  default: return s.m * s.p * (1.0 + 4.0 * s.p + s.p * s.p) / (q * q * q * q);
                              }
                          },
                          [&](const SkellamSeed& s) {
                              return order % 2 == 1 ? s.psi_plus - s.psi_minus : s.psi_plus + s.psi_minus;
                          },
                      },
                      seed);
}

Eigen::VectorXd cumulant_gradient(const LevySeed& seed, int order) {
    if (order < 1 || order > 4) throw DomainError("cumulant order must be in 1..4");
    return std::visit(overloaded{
                          [&](const PoissonSeed&) { return Eigen::VectorXd{{1.0}}; },
                          [&](const NegBinSeed& s) {
                              const double p = s.p;
                              const double q = 1.0 - p;
                              // kappa_j = m * g_j(p)
                              double g = 0.0;
                              double dg = 0.0;
                              switch (order) {
                                  case 1:
                                      g = p / q;
                                      dg = 1.0 / (q * q);
                                      break;
                                  case 2:
                                      g = p / (q * q);
                                      dg = (1.0 + p) / (q * q * q);
                                      break;
                                  case 3:
                                      g = p * (1.0 + p) / (q * q * q);
                                      dg = (1.0 + 4.0 * p + p * p) / (q * q * q * q);
                                      break;
                                  default:
                                      g = p * (1.0 + 4.0 * p + p * p) / (q * q * q * q);
                                      dg = (1.0 + 11.0 * p + 11.0 * p * p + p * p * p) / (q * q * q * q * q);
                                      break;
                              }
                              return Eigen::VectorXd{{g, s.m * dg}};
                          },
                          [&](const SkellamSeed&) {
                              return order % 2 == 1 ? Eigen::VectorXd{{1.0, -1.0}} : Eigen::VectorXd{{1.0, 1.0}};
                          },
                      },
                      seed);
}

std::pair<long, long> support_window(const LevySeed& seed, double leb, double tail) {
    if (!(leb >= 0.0)) throw DomainError("Lebesgue measure must be nonnegative");
    if (leb == 0.0) return {0, 0};
    const bool nonneg = is_nonnegative(seed);
    long start = std::lround(cumulant(seed, 1) * leb);
    if (nonneg) start = std::max(start, 0L);
    long lo = start;
    long hi = start;
    double mass = pmf_on_set(seed, leb, start);
    double below = (nonneg && lo == 0) ? 0.0 : pmf_on_set(seed, leb, lo - 1);
    double above = pmf_on_set(seed, leb, hi + 1);
    while (mass < 1.0 - tail) {
        if (below <= 0.0 && above <= 0.0 && mass > 0.0) break;
        if (below > above) {
            --lo;
            mass += below;
            below = (nonneg && lo == 0) ? 0.0 : pmf_on_set(seed, leb, lo - 1);
        } else {
            ++hi;
            mass += above;
            above = pmf_on_set(seed, leb, hi + 1);
        }
    }
    return {lo, hi};
}

ComponentTable component_table(const LevySeed& seed, double leb, long lo, long hi, bool with_derivatives) {
    if (hi < lo) throw DomainError("component table range is empty");
    const long size = hi - lo + 1;
    const int r = parameter_count(seed);
    ComponentTable table;
    table.lo = lo;
    table.log_p.resize(size);
    for (long i = 0; i < size; ++i) table.log_p(i) = log_pmf_on_set(seed, leb, lo + i);
    if (!with_derivatives) return table;

    table.dlog_p = Eigen::MatrixXd::Zero(size, r + 1);
    std::visit(overloaded{
                   [&](const PoissonSeed& s) {
                       for (long i = 0; i < size; ++i) {
                           const long x = lo + i;
                           if (table.log_p(i) == math::kNegInf) continue;
                           const double xd = static_cast<double>(x);
                           table.dlog_p(i, 0) = (x == 0 ? 0.0 : xd / leb) - s.nu;
                           table.dlog_p(i, 1) = (x == 0 ? 0.0 : xd / s.nu) - leb;
                       }
                   },
                   [&](const NegBinSeed& s) {
                       const double a = s.m * leb;
                       const double log_q = std::log1p(-s.p);
                       // harmonic(x) = sum_{j<x} 1 / (a + j), the derivative of log Gamma(a + x) / Gamma(a)
                       long first = std::max(lo, 0L);
                       double harmonic = 0.0;
                       for (long j = 0; j < first; ++j) harmonic += 1.0 / (a + static_cast<double>(j));
                       for (long x = first; x <= hi; ++x) {
                           const long i = x - lo;
                           if (table.log_p(i) != math::kNegInf) {
                               const double xd = static_cast<double>(x);
                               table.dlog_p(i, 0) = s.m * (harmonic + log_q);
                               table.dlog_p(i, 1) = leb * (harmonic + log_q);
                               table.dlog_p(i, 2) = xd / s.p - a / (1.0 - s.p);
                           }
                           harmonic += 1.0 / (a + static_cast<double>(x));
                       }
                   },
                   [&](const SkellamSeed& s) {
                       // dP(k)/da = P(k-1) - P(k), dP(k)/db = P(k+1) - P(k) for a = leb psi+, b = leb psi-
                       const double left_edge = log_pmf_on_set(seed, leb, lo - 1);
                       const double right_edge = log_pmf_on_set(seed, leb, hi + 1);
                       for (long i = 0; i < size; ++i) {
                           const double lp = table.log_p(i);
                           if (lp == math::kNegInf) continue;
                           const double prev = i == 0 ? left_edge : table.log_p(i - 1);
                           const double next = i == size - 1 ? right_edge : table.log_p(i + 1);
                           const double down = std::exp(prev - lp) - 1.0;
                           const double up = std::exp(next - lp) - 1.0;
                           table.dlog_p(i, 0) = s.psi_plus * down + s.psi_minus * up;
                           table.dlog_p(i, 1) = leb * down;
                           table.dlog_p(i, 2) = leb * up;
                       }
                   },
               },
               seed);
    return table;
}

CompoundPoissonRep compound_poisson_rep(const LevySeed& seed) {
    validate(seed);
    return std::visit(overloaded{
                          [](const PoissonSeed& s) { return CompoundPoissonRep{s.nu, UnitMarks{}}; },
                          [](const NegBinSeed& s) {
                              return CompoundPoissonRep{-s.m * std::log1p(-s.p), LogarithmicMarks{s.p}};
                          },
                          [](const SkellamSeed& s) {
                              const double total = s.psi_plus + s.psi_minus;
                              return CompoundPoissonRep{total, SignedUnitMarks{s.psi_plus / total}};
                          },
                      },
                      seed);
}

double mark_pmf(const CompoundPoissonRep& rep, long y) {
    return std::visit(overloaded{
                          [&](const UnitMarks&) { return y == 1 ? 1.0 : 0.0; },
                          [&](const SignedUnitMarks& m) {
                              if (y == 1) return m.prob_up;
                              if (y == -1) return 1.0 - m.prob_up;
                              return 0.0;
                          },
                          [&](const LogarithmicMarks& m) {
                              if (y < 1) return 0.0;
                              const double yd = static_cast<double>(y);
                              return std::exp(yd * std::log(m.p) - std::log(yd) - std::log(-std::log1p(-m.p)));
                          },
                      },
                      rep.marks);
}

long sample_mark(const CompoundPoissonRep& rep, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return std::visit(overloaded{
                          [&](const UnitMarks&) { return 1L; },
                          [&](const SignedUnitMarks& m) { return unif(rng) < m.prob_up ? 1L : -1L; },
                          [&](const LogarithmicMarks& m) {
                              // Kemp's LK algorithm
                              const double v = unif(rng);
                              if (v >= m.p) return 1L;
                              const double u = unif(rng);
                              const double q = -std::expm1(std::log1p(-m.p) * u);
                              if (v <= q * q) {
                                  return static_cast<long>(std::floor(1.0 + std::log(v) / std::log(q)));
                              }
                              return v <= q ? 2L : 1L;
                          },
                      },
                      rep.marks);
}

long sample_on_set(const CompoundPoissonRep& rep, double leb, std::mt19937_64& rng) {
    if (!(leb >= 0.0)) throw DomainError("Lebesgue measure must be nonnegative");
    if (leb == 0.0) return 0;
    std::poisson_distribution<long> count(rep.total_intensity * leb);
    const long points = count(rng);
    if (std::holds_alternative<UnitMarks>(rep.marks)) return points;
    long total = 0;
    for (long i = 0; i < points; ++i) total += sample_mark(rep, rng);
    return total;
}

double log_bessel_i(long nu, double z) {
    if (nu < 0) throw DomainError("Bessel order must be nonnegative");
    if (!(z >= 0.0)) throw DomainError("Bessel argument must be nonnegative");
    if (z == 0.0) return nu == 0 ? 0.0 : math::kNegInf;
    const double half_log = std::log(0.5 * z);
    const double nud = static_cast<double>(nu);
    auto term = [&](double m) { return (2.0 * m + nud) * half_log - std::lgamma(m + 1.0) - std::lgamma(m + nud + 1.0); };
    // Terms t_m = (z/2)^(2m+nu) / (m! (m+nu)!) peak where (m+1)(m+nu+1) ~ (z/2)^2.
    const double peak_m = std::max(0.0, std::floor(0.5 * (-(nud + 2.0) + std::sqrt(nud * nud + z * z))));
    const double peak = term(peak_m);
    constexpr double kCut = 40.0;
    double acc = 1.0;
    for (double m = peak_m + 1.0;; m += 1.0) {
        const double t = term(m) - peak;
        acc += std::exp(t);
        if (t < -kCut) break;
    }
    for (double m = peak_m - 1.0; m >= 0.0; m -= 1.0) {
        const double t = term(m) - peak;
        acc += std::exp(t);
        if (t < -kCut) break;
    }
    return checked(peak + std::log(acc), "log_bessel_i");
}

}  // namespace ivt
