#pragma once

// Markovian discovery of a unit hypercube around the origin, with marks and
// an audit of every transition vector the policy looks at, plus the escape
// path bundle built on the discovered cube.

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/hypercube.hpp"
#include "rwre/lattice.hpp"

namespace rwre {

/// Read access to an environment restricted to an allowed site set; every
/// read is logged.
class AuditedView {
public:
    explicit AuditedView(const Environment& env) : env_(&env) {}

    void allow(std::vector<Site> sites) { allowed_ = std::move(sites); }
    /// Throws MeasurabilityViolation outside the allowed set.
    TransitionVector read(const Site& x);
    std::vector<Site> take_reads();
    int dim() const { return env_->dim(); }

private:
    const Environment* env_;
    std::vector<Site> allowed_;
    std::vector<Site> reads_;
};

class DiscoveryPolicy {
public:
    virtual ~DiscoveryPolicy() = default;
    virtual std::string name() const = 0;
    /// Signed axes spanning the cube the policy builds.
    virtual std::vector<Direction> axes(int d) const;
    /// f_{i+1} given f_0..f_i; may read only those sites.
    virtual Site next(const std::vector<Site>& prefix, AuditedView& view) = 0;
    /// Marks by corner mask of the discovered cube (offset from x0); may read the cube.
    virtual std::vector<double> marks(const UnitHypercube& h, AuditedView& view) = 0;
};

struct DiscoveryStep {
    Site site;
    std::vector<Site> reads;
};

struct MarkedMarkovianHypercube {
    UnitHypercube h;
    Site x0;
    std::vector<double> marks;  // by corner mask
    std::vector<DiscoveryStep> log;  // f_1 .. f_{2^d - 1}
    std::vector<Site> markReads;
    std::string policy;

    // Labels of the (E')_1 construction, empty for other policies.
    int event = 0;  // k of A_k, 1-based
    std::vector<Site> v;  // v_0 .. v_d
    std::vector<Site> u;  // u_1 .. u_{d-1}
};

/// Runs the policy, enforcing the four discovery rules; throws
/// MeasurabilityViolation or ParameterError when a rule breaks.
MarkedMarkovianHypercube discover(const Environment& env, DiscoveryPolicy& policy);

/// Sites of a cube in breadth-first order from `start`, directions in index order.
std::vector<Site> bfs_order(const UnitHypercube& cube, const Site& start);

/// The A_k construction: first k (basis order e_1..e_d, -e_1..-e_d) with
/// p(0, e_k) >= delta picks h = H_0 (k <= d) or H_(-1,..,-1) (k > d).
class EprimePolicy : public DiscoveryPolicy {
public:
    /// phi indexed by lattice direction index; delta in (0, 1/(2d)).
    EprimePolicy(std::vector<double> phi, double delta, DirectionBasis basis);
    EprimePolicy(std::vector<double> phi, double delta);

    std::string name() const override { return "eprime"; }
    std::vector<Direction> axes(int d) const override;
    Site next(const std::vector<Site>& prefix, AuditedView& view) override;
    std::vector<double> marks(const UnitHypercube& h, AuditedView& view) override;

    int event() const { return k_ + 1; }
    const std::vector<Site>& v_labels() const { return v_; }
    const std::vector<Site>& u_labels() const { return u_; }

private:
    std::vector<double> phi_;
    double delta_;
    DirectionBasis basis_;
    int k_ = -1;
    std::vector<Site> order_;
    std::vector<Site> v_, u_;
};

/// A fixed cube containing the origin with fixed marks.
class FixedPolicy : public DiscoveryPolicy {
public:
    FixedPolicy(UnitHypercube cube, std::vector<double> marks);

    std::string name() const override { return "fixed"; }
    std::vector<Direction> axes(int d) const override;
    Site next(const std::vector<Site>& prefix, AuditedView& view) override;
    std::vector<double> marks(const UnitHypercube& h, AuditedView& view) override;

private:
    UnitHypercube cube_;
    std::vector<double> marks_;
    std::vector<Site> order_;
};

/// gamma_x = sum of phi over the exterior directions of corner x.
std::vector<double> gammas_from_phi(const UnitHypercube& cube, const std::vector<double>& phi);

/// sum_x min(gamma_x, alpha_x).
double mark_sum(const MarkedMarkovianHypercube& mmh, const std::vector<double>& gammas);

struct BundlePath {
    std::size_t corner = 0;     // mask in h
    Site y1;                    // exit site next to the corner
    double exitProb = 0.0;      // P_0[T_dh < T_0^+, X_{T_dh} = y1]
    std::vector<Site> ys;       // y_1 .. y_n
    std::vector<double> Q;      // Q at y_1 .. y_{n-1}
    double pi = 0.0;
    double qtilde = 0.0;        // Q~_{0, x0 + x}
    double bound = 0.0;         // (1/d) Q~ prod Q
};

struct PathBundle {
    int n = 0;
    std::vector<BundlePath> paths;
    bool disjoint = true;
    bool distanceOk = true;
    bool boundHolds = true;
    double maxPi() const;
};

PathBundle paths(const Environment& env, const MarkedMarkovianHypercube& mmh, int n);

}  // namespace rwre
