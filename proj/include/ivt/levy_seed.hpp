#pragma once

#include "ivt/errors.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <utility>
#include <variant>

namespace ivt {

// Integer-valued Levy seeds. The law of L(B) depends on B only through Leb(B).

struct PoissonSeed {
    double nu;
};

struct NegBinSeed {
    double m;
    double p;
};

struct SkellamSeed {
    double psi_plus;
    double psi_minus;
};

using LevySeed = std::variant<PoissonSeed, NegBinSeed, SkellamSeed>;

void validate(const LevySeed& seed);

[[nodiscard]] bool is_nonnegative(const LevySeed& seed);

/// Number of seed parameters: 1 for Poisson, 2 otherwise.
[[nodiscard]] int parameter_count(const LevySeed& seed);

[[nodiscard]] Eigen::VectorXd parameters(const LevySeed& seed);

/// log P(L(B) = x) for Leb(B) = leb. Returns -inf outside the support.
[[nodiscard]] double log_pmf_on_set(const LevySeed& seed, double leb, long x);

[[nodiscard]] double pmf_on_set(const LevySeed& seed, double leb, long x);

/// j-th cumulant of L' for j in 1..4.
[[nodiscard]] double cumulant(const LevySeed& seed, int order);

/// Partial derivatives of cumulant(order) with respect to the seed parameters.
[[nodiscard]] Eigen::VectorXd cumulant_gradient(const LevySeed& seed, int order);

/// Smallest window [lo, hi] around the mode holding at least 1 - tail of the
/// mass of L(B).
[[nodiscard]] std::pair<long, long> support_window(const LevySeed& seed, double leb, double tail);

/// Log-PMF of L(B) on a contiguous integer range, together with the partials
/// of each log-probability with respect to Leb(B) (column 0) and the seed
/// parameters (columns 1..r).
struct ComponentTable {
    long lo{0};
    Eigen::VectorXd log_p;
    Eigen::MatrixXd dlog_p;

    [[nodiscard]] long hi() const { return lo + static_cast<long>(log_p.size()) - 1; }
    [[nodiscard]] bool contains(long x) const { return x >= lo && x <= hi(); }
    [[nodiscard]] double log_at(long x) const { return log_p(x - lo); }
};

[[nodiscard]] ComponentTable component_table(const LevySeed& seed, double leb, long lo, long hi,
                                             bool with_derivatives);

// Compound-Poisson view of the seed: L(B) is a sum of Poisson(total_intensity * Leb(B))
// iid marks drawn from the normalized Levy measure.

struct UnitMarks {};
struct SignedUnitMarks {
    double prob_up;
};
struct LogarithmicMarks {
    double p;
};

using MarkLaw = std::variant<UnitMarks, SignedUnitMarks, LogarithmicMarks>;

struct CompoundPoissonRep {
    double total_intensity;
    MarkLaw marks;
};

[[nodiscard]] CompoundPoissonRep compound_poisson_rep(const LevySeed& seed);

[[nodiscard]] double mark_pmf(const CompoundPoissonRep& rep, long y);

[[nodiscard]] long sample_mark(const CompoundPoissonRep& rep, std::mt19937_64& rng);

/// One draw of L(B) for Leb(B) = leb through the compound-Poisson route.
[[nodiscard]] long sample_on_set(const CompoundPoissonRep& rep, double leb, std::mt19937_64& rng);

/// log I_nu(z) for integer order nu >= 0 and z >= 0, summed in log space.
[[nodiscard]] double log_bessel_i(long nu, double z);

}  // namespace ivt
