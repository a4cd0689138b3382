#pragma once

#include "ivt/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace ivt {

/// Draws X_delta, ..., X_{n delta} from the stationary law of the model.
///
/// Points of the compound-Poisson random measure alive at the first
/// observation are drawn directly from their stationary distribution under
/// the trawl curve, later points arrive at rate total_intensity * d(0).
/// Each point carries one mark and contributes it to every X_{i delta}
/// whose trawl set contains it. tail_eps is the relative tolerance of the
/// numerical inversion of the trawl curve (SupExp and IG trawls).
[[nodiscard]] CountSeries simulate_path(const IvtModel& model, long n, std::uint64_t rng_seed,
                                        double tail_eps = 1e-6);

[[nodiscard]] CountSeries simulate_path(const IvtModel& model, long n, std::mt19937_64& rng,
                                        double tail_eps = 1e-6);

/// B independent paths; path b uses stream b of the master seed.
[[nodiscard]] std::vector<CountSeries> simulate_paths(const IvtModel& model, long n, long B,
                                                      std::uint64_t master_seed, int workers = 1);

/// Depth r of a point alive at a fixed time. Its survival function is acf(r).
[[nodiscard]] double sample_depth(const TrawlSpec& trawl, std::mt19937_64& rng);

/// Age at which a point of height u leaves the trawl: trawl_height(tau) = u.
[[nodiscard]] double lifetime(const TrawlSpec& trawl, double u, double rel_tol = 1e-10);

}  // namespace ivt
