#pragma once

// Regeneration times of finite annealed trajectories, with a certification
// window standing in for "never backtracks again".

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"

namespace rwre {

struct RegenParams {
    RealVec ell;                     // unit vector
    double a = 0.0;                  // level spacing
    std::uint64_t certifyMargin = 0; // W; 0 means horizon / 4

    /// a = 3 sqrt(d), W = horizon / 4.
    static RegenParams defaults(RealVec ell);
    /// Throws unless a lies in (2 sqrt d, 10 sqrt d), when `allowAnyA` is false.
    void validate(bool allowAnyA = false) const;
};

struct RegenerationPoint {
    std::uint64_t time = 0;
    Site position;
    bool certified = false;
};

struct RegenerationRecord {
    Site start;
    Site end;
    std::uint64_t length = 0;
    std::vector<RegenerationPoint> points;  // tau_1, tau_2, ...; certified ones first
    bool droppedBelowStart = false;         // D < length
    std::uint64_t D = 0;                    // valid when droppedBelowStart

    std::size_t certified() const;
};

RegenerationRecord extract(const Trajectory& traj, const RegenParams& params);

/// X*(n) = max over tau_{n-1} <= k <= tau_n of |X_k - X_{tau_{n-1}}|_1 for each
/// certified interval (tau_0 = 0).
std::vector<std::int64_t> regeneration_radii(const RegenerationRecord& record, const Trajectory& traj);

struct VelocityEstimate {
    RealVec v;                         // renewal estimate
    std::vector<stats::Interval> ci;   // per coordinate
    stats::MeanEstimate along;         // renewal estimate of v . u
    stats::MeanEstimate directAlong;   // mean over walks of X_n . u / n
    RealVec direct;                    // mean over walks of X_n / n
    std::size_t walksUsed = 0;
    std::size_t intervals = 0;
    std::size_t walks = 0;
};

/// Renewal velocity from certified inter-regeneration blocks (the first block
/// of each walk is discarded), batch-means CI with 32 batches. Throws
/// InsufficientData when fewer than 32 blocks qualify.
VelocityEstimate renewal_velocity(const std::vector<RegenerationRecord>& records, const RealVec& along);

/// Walks that never go below their start level within the horizon: the
/// rejection sample for the law conditioned on 0 being a regeneration time.
std::vector<RegenerationRecord> zero_regen(const std::vector<RegenerationRecord>& records);
/// tau_1 of every walk whose first regeneration is certified.
std::vector<double> first_regeneration_times(const std::vector<RegenerationRecord>& records);

/// Inter-regeneration times of certified blocks after the first, per walk.
std::vector<std::vector<double>> inter_times(const std::vector<RegenerationRecord>& records);

struct RegenRun {
    std::vector<RegenerationRecord> records;
    std::vector<std::vector<std::int64_t>> radii;
};

/// Annealed runs: walk w uses environment seed replicate_seed(seed, w) and
/// walk seed derive_seed(seed, w, 0), all started at the origin.
RegenRun simulate_regenerations(const SiteLaw& law, const RegenParams& params, std::uint64_t steps,
                                std::size_t walks, std::uint64_t seed);

/// One row per regeneration: walk,k,tau,x_1..x_d,censored.
void write_regenerations_csv(std::ostream& os, const std::vector<RegenerationRecord>& records);

}  // namespace rwre
