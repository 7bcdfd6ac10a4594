#pragma once

#include "gse/distribution.hpp"
#include "gse/quad.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gse {

struct SampleBatch {
    Matrix draws;  // m × n, one draw of Y per row
    std::uint64_t seed = 0;
    double accepted_fraction = 0.0;
    std::size_t proposals = 0;
};

// Exact sampler: elliptical proposal Z = R·U, accepted with probability H(Z).
SampleBatch sample_gse(const GseDistribution& dist, std::size_t m, std::uint64_t seed);

enum class EventSpace { Standardized, Observed };

// {lower < Z ≤ upper} in standardized space, or {lower < Y ≤ upper} in observed space.
struct OracleEvent {
    EventSpace space = EventSpace::Standardized;
    Rectangle rect = Rectangle::whole(1);
};

// Monte Carlo estimates with jackknife standard errors.
struct OracleEstimate {
    std::size_t draws = 0;
    std::size_t hits = 0;
    double prob = 0.0, prob_se = 0.0;
    Vector delta, delta_se;    // E[Z 1{event}]
    Matrix omega, omega_se;    // E[Z Zᵀ 1{event}]
    Vector mean, mean_se;      // E[Y | event]
    Matrix second, second_se;  // E[Y Yᵀ | event]
    Matrix cov, cov_se;        // Cov[Y | event]
    double accepted_fraction = 0.0;
};

// One pass over m accepted draws, every event estimated from the same draws.
std::vector<OracleEstimate> oracle_run(const GseDistribution& dist, std::span<const OracleEvent> events,
                                       std::size_t m, std::uint64_t seed);

OracleEstimate oracle_truncated_report(const GseDistribution& dist, const Rectangle& rect_std,
                                       std::size_t m, std::uint64_t seed);

// Threads used by oracle runs: GSE_THREADS when set and positive, else hardware concurrency.
unsigned worker_threads();

}  // namespace gse
