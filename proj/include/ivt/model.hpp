#pragma once

#include "ivt/levy_seed.hpp"
#include "ivt/trawl.hpp"

#include <vector>

namespace ivt {

/// X_t = L(A_t) observed every delta time units.
struct IvtModel {
    LevySeed seed;
    TrawlSpec trawl;
    double delta{1.0};
};

void validate(const IvtModel& model);

/// Parameters (seed, trawl) in declaration order.
[[nodiscard]] Eigen::VectorXd parameters(const IvtModel& model);

[[nodiscard]] int parameter_count(const IvtModel& model);

/// Equidistant observations x_1..x_n taken at origin, origin + delta, ...
struct CountSeries {
    std::vector<long> values;
    double delta{1.0};
    double origin{1.0};

    [[nodiscard]] long size() const { return static_cast<long>(values.size()); }
};

/// Throws DomainError when a value lies outside the seed's support.
void check_support(const LevySeed& seed, const CountSeries& x);

}  // namespace ivt
