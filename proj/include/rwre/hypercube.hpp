#pragma once

// Exact quenched analysis of a unit hypercube as a 2^d-state absorbing chain.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "rwre/environment.hpp"
#include "rwre/lattice.hpp"
#include "rwre/stats.hpp"

namespace rwre {

using Matrix = Eigen::MatrixXd;

/// Transition data of one cube, indexed by corner mask.
struct QuenchedHypercube {
    UnitHypercube cube;
    std::vector<TransitionVector> p;
    Matrix interior;               // P_HH
    std::vector<double> exitMass;  // one-step exit probability per corner

    static QuenchedHypercube build(const Environment& env, const UnitHypercube& cube);
    static QuenchedHypercube from_vectors(const UnitHypercube& cube, std::vector<TransitionVector> vectors);

    std::size_t size() const { return p.size(); }
};

struct ExitAnalysis {
    std::vector<double> Q;           // max one-step exit probability per corner
    Matrix Qtilde;                   // Q~_{x,y}: leave via a neighbour of y before returning to x
    std::vector<double> QtildeRow;   // Q~_x = P_x[T_exit < T_x^+]
    std::vector<double> meanExit;    // E_x[T^ex]
    Matrix fundamental;              // E_x0[N(x)] = (I - P_HH)^{-1}
    Matrix hitProb;                  // P_x0[T_x < T^ex] from a separate solve
    Matrix escapeVisits;             // G(x, z): visits to z before exit or return to x, started at x
    std::vector<std::vector<double>> moments;  // moments[k-1][x] = E_x[(T^ex)^k]
};

/// Throws DegenerateEnvironment when some corner cannot reach the exterior.
ExitAnalysis analyze(const QuenchedHypercube& qh, int momentOrder = 1);
ExitAnalysis analyze(const Environment& env, const UnitHypercube& cube, int momentOrder = 1);

/// One exterior step out of the cube.
struct ExitStep {
    std::size_t corner = 0;  // mask
    int direction = 0;
    Site target;
    double prob = 0.0;
};

/// Law of the exit step on {T_exit < T_x^+} from corner x (total mass Q~_x).
std::vector<ExitStep> exit_law(const QuenchedHypercube& qh, const ExitAnalysis& a, std::size_t fromCorner);

struct InequalityCheck {
    bool visitIdentity = true;  // E_x0[N(x)] Q~_x = P_x0[T_x < T^ex]
    bool qtildeSandwich = true; // Q~_{x,y} <= Q~_x <= 2^d max_y Q~_{x,y}
    bool exitSandwich = true;   // 1/Q~_x0 <= E_x0[T^ex] <= sum_y 1/Q~_y
    bool meanIsVisitSum = true; // E_x0[T^ex] = sum_x E_x0[N(x)]
    double maxIdentityError = 0.0;
    double maxSumError = 0.0;
};

/// Checks the exact identities at the given absolute tolerance (the sandwich
/// inequalities are checked with the same slack).
InequalityCheck check_identities(const ExitAnalysis& a, double tol = 1e-10);

struct FractionalMomentReport {
    double alpha = 0.0;
    bool exact = false;                 // integer alpha, absorbing-chain solve
    std::vector<double> values;         // per environment max_x E_x[(T^ex)^alpha]
    std::vector<std::uint64_t> seeds;   // environment seeds
    std::uint64_t censoredWalks = 0;    // MC only
    std::uint64_t totalWalks = 0;
    stats::MomentVerdict verdict;       // on values^(1/alpha) against alpha
};

struct FractionalMomentParams {
    double alpha = 1.0;
    std::size_t replicates = 1000;
    std::uint64_t walksPerCorner = 1000;  // non-integer alpha only
    std::uint64_t horizon = 1000000;      // per walk, non-integer alpha only
};

/// Environment seed of replicate r.
std::uint64_t replicate_seed(std::uint64_t masterSeed, std::uint64_t r);

/// Quenched (H)_alpha probe on the cube at the origin over independent environments.
FractionalMomentReport fractional_moment(const SiteLaw& law, const FractionalMomentParams& params,
                                         std::uint64_t masterSeed);

struct VisitLawCheck {
    double qtilde = 0.0;
    double meanVisits = 0.0;
    stats::MeanEstimate visits;
    stats::ChiSquareResult chi;
    std::uint64_t runs = 0;
    std::uint64_t censored = 0;
};

/// N(x) under P_x, counted until exit (time 0 included), against Geometric(Q~_x).
VisitLawCheck visit_law_check(const Environment& env, const UnitHypercube& cube, std::size_t corner,
                              std::uint64_t runs, std::uint64_t seed, std::uint64_t horizon = 1000000);

/// MC exit times from a corner; censored walks are counted, not returned.
struct ExitTimeSample {
    std::vector<double> times;
    std::uint64_t censored = 0;
};
ExitTimeSample sample_exit_times(const Environment& env, const UnitHypercube& cube, std::size_t corner,
                                 std::uint64_t runs, std::uint64_t seed, std::uint64_t horizon);

void write_analysis_csv_header(std::ostream& os, int dim, int momentOrder);
void write_analysis_csv_row(std::ostream& os, std::uint64_t seed, const ExitAnalysis& a);

}  // namespace rwre
