#pragma once

// Empirical checks of the moment, effective and slab criteria. Every verdict
// is a statement about the sample, never a proof.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/discovery.hpp"
#include "rwre/environment.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"

namespace rwre::criteria {

enum class Verdict { Satisfied, Violated, Inconclusive };
std::string to_string(Verdict v);

struct Estimate {
    std::string name;
    double value = 0.0;
    double ciLow = 0.0;
    double ciHigh = 0.0;
    std::uint64_t n = 0;
    std::uint64_t censored = 0;
};

struct CriterionReport {
    std::string criterion;
    nlohmann::json params = nlohmann::json::object();
    std::vector<Estimate> estimates;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::string> notes;

    const Estimate& estimate(const std::string& name) const;
    nlohmann::json to_json() const;
};

/// Non-finite values become the strings "inf", "-inf", "nan".
nlohmann::json json_number(double v);

/// Hill index of a moment verdict with its interval.
Estimate tail_estimate(const std::string& name, const stats::MomentVerdict& mv);

struct Sampling {
    std::size_t replicates = 10000;  // independent environments
    std::uint64_t seed = 0;
};

/// (E)_0: every 1/p(0,e) has a positive tail index and p(0,e) > 0 on the sample.
CriterionReport condition_E0(const SiteLaw& law, const Sampling& s);

/// (E')_1 refuted for every admissible phi when all E[p(0,e)^-exponent] look
/// infinite (some phi(e0) >= exponent = 1/(4d) is forced by part 1).
CriterionReport condition_Eprime_probe(const SiteLaw& law, double exponent, const Sampling& s);

/// (E')_1 for a given phi (indexed by direction).
CriterionReport condition_Eprime(const SiteLaw& law, const std::vector<double>& phi, const Sampling& s);

/// (K~)_1 with exponent 1 + eps over the corners of the cube at the origin.
/// For the expl law the almost sure bound Q_x >= eps_law/d is also checked.
CriterionReport condition_Ktilde(const SiteLaw& law, double eps, const Sampling& s);

using PolicyFactory = std::function<std::unique_ptr<DiscoveryPolicy>()>;

struct KSpec {
    double alpha = 1.0;
    double eps = 0.0;
    std::vector<double> gammas;  // by corner mask of the cube at the origin
    PolicyFactory policy;
    std::string policyName;
};

/// Eprime policy with gamma from phi; eps <= 0 picks 2 sum phi - max(phi(e)+phi(-e)) - alpha.
KSpec eprime_spec(int d, const std::vector<double>& phi, double alpha, double delta = 0.0, double eps = 0.0);
/// Single-corner construction: h = H_{-x}, alpha = gamma = (1+eps) at corner x only.
KSpec single_corner_spec(int d, double eps, std::size_t cornerMask);

/// (K)_alpha parts (1)-(3) over sampled environments.
CriterionReport condition_K(const SiteLaw& law, const KSpec& spec, const Sampling& s);

/// Dispatcher used by the command line: name in {E0, Eprime1, Eprime1-probe, Ktilde1, K}.
struct MomentSpec {
    std::string criterion;
    double exponent = 0.0;    // probe exponent, 0 selects 1/(4d)
    std::vector<double> phi;  // empty selects 1/(2d) + 0.05 per direction
    double eps = 0.0;
    double alpha = 1.0;
    double delta = 0.0;
    std::string policy = "eprime";  // or "single-corner"
    std::size_t corner = 0;
};
CriterionReport moment_conditions(const SiteLaw& law, const MomentSpec& spec, const Sampling& s);

struct BoxGrid {
    double Lp = 0.0;
    double Ltilde = 0.0;
};

/// Search grid L' in {L, 9L/8, 5L/4}, L~ in {L, 4L, 16L} capped by 72 L^3.
std::vector<BoxGrid> pm_grid(double L);
/// Upper limits of L' and L~ at scale L.
BoxGrid pm_limits(double L);

struct WalkSampling {
    std::uint64_t walkBudget = 1000000;
    std::size_t replicates = 1000;  // one environment and one walk each
    std::uint64_t seed = 0;
};

/// (P)_M: minimum over the grid of P[X_exit . ell < L] for the box
/// R((-L', L) x (-L~, L~)^{d-1}), against L^-M.
CriterionReport polynomial_condition(const SiteLaw& law, const RealVec& ell, double M, const std::vector<double>& Ls,
                                     const WalkSampling& w);

/// Annealed P[X_exit . ell < 0] out of {-bL <= x . ell <= L}, with a fit of
/// log P against L^gamma. probeRadius > 0 repeats the fit at ell +- radius e_i.
CriterionReport slab_exit(const SiteLaw& law, const RealVec& ell, double b, const std::vector<double>& Ls,
                          const WalkSampling& w, double gamma = 1.0, double probeRadius = 0.0);

/// P[max_x pi_x^(n) < u^{-(alpha + 2 delta)/(alpha + eps)}], n = floor(eta log u),
/// against u^{-(alpha + delta)}.
struct AttainParams {
    std::vector<double> us;
    double delta = 0.1;
    double eta = 0.5;
    double alpha = 1.0;
    double eps = 0.2;
    std::size_t replicates = 10000;
    std::uint64_t seed = 0;
};
CriterionReport attainability(const SiteLaw& law, const PolicyFactory& policy, const AttainParams& p);

struct TiltedExit {
    BinomialTally tally;  // success: front exit
    stats::Interval ci;
};

/// Quenched probability of leaving the tilted box through its front.
TiltedExit tilted_box_exit(const Environment& env, const Site& center, double beta, double L, const RealVec& vhat,
                           std::uint64_t walkBudget, std::uint64_t runs, std::uint64_t seed);

}  // namespace rwre::criteria
