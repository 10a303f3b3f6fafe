#pragma once

// I.i.d. random environments evaluated lazily: the transition vector at a
// site is a pure function of (master seed, law, site).

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rwre/lattice.hpp"
#include "rwre/random.hpp"

namespace rwre {

/// Probabilities p(e) indexed like Direction (0..d-1 -> +e_i, d..2d-1 -> -e_i).
class TransitionVector {
public:
    TransitionVector() = default;
    /// Renormalizes when |sum - 1| <= 1e-9, throws ParameterError otherwise.
    TransitionVector(int dim, const double* values);
    static TransitionVector from(std::initializer_list<double> values);
    static TransitionVector uniform(int dim);

    int dim() const { return dim_; }
    int size() const { return 2 * dim_; }
    double operator[](int e) const { return p_[static_cast<std::size_t>(e)]; }
    double min_entry() const;
    double max_entry() const;
    bool elliptic() const { return min_entry() > 0.0; }

    /// Inverse CDF over the fixed direction order.
    int sample(double u) const;

    friend bool operator==(const TransitionVector& a, const TransitionVector& b) {
        return a.dim_ == b.dim_ && a.p_ == b.p_;
    }

private:
    std::array<double, 2 * kMaxDim> p_{};
    int dim_ = 0;
};

namespace law {

/// p(e) = kappa + (1 - 2d kappa) W_e / sum W with W_e = U_e, the weight of
/// +e_axis multiplied by (1 + strength). kappa = 1/(2d) gives the simple
/// symmetric walk.
struct UniformDrift {
    int d = 2;
    double kappa = 0.25;
    int axis = 0;
    double strength = 0.0;
};

/// The ballistic example: one direction i0 (uniform) gets 1/T, the remaining
/// positive directions share 1 - eps and the negative ones share eps.
struct Expl {
    int d = 2;
    double eps = 0.2;
};

/// Symmetric trap law on Z^d: a uniform sign basis B0 gets T/d per direction,
/// the opposite directions get (1 - T)/d.
/// `tail` is t in P[1/T >= n] = (2/n)^t; 0 selects t = 2^-d.
struct TrapSym {
    int d = 2;
    double tail = 0.0;
};

/// Transient trap law on Z^{d+1}: the TrapSym construction on the first d
/// axes plus weights 2T up and T down along e_{d+1}, normalized by C(T,d).
struct TrapTransient {
    int d = 1;
    double tail = 0.0;
};

struct Dirichlet {
    std::vector<double> weights;  // 2d weights, direction order
};

struct TableMixture {
    std::vector<double> weights;
    std::vector<TransitionVector> vectors;
};

}  // namespace law

using SiteLaw = std::variant<law::UniformDrift, law::Expl, law::TrapSym, law::TrapTransient, law::Dirichlet,
                             law::TableMixture>;

/// Lattice dimension of the walk driven by the law.
int lattice_dim(const SiteLaw& law);
std::string law_name(const SiteLaw& law);
std::uint64_t law_tag(const SiteLaw& law);
/// Throws ParameterError on out-of-range parameters.
void validate(const SiteLaw& law);
/// Whether every sample of the law has all entries > 0 almost surely.
bool law_is_elliptic(const SiteLaw& law);

/// T = (2d+1) U^{-6d}: Pareto on [2d+1, inf) with tail exponent 1/(6d).
double sample_expl_T(double u, int d);
/// T = U^{2^d} / 2, so P[1/T >= n] = (2/n)^{1/2^d} for n >= 2.
double sample_trap_T(double u, int d);
/// T = U^{1/t} / 2, so P[1/T >= n] = (2/n)^t for n >= 2.
double sample_trap_T_tail(double u, double t);
/// Effective tail exponent of a trap law (2^-d unless overridden).
double trap_tail(int d, double tail);

/// Per-site extra information some laws expose (i0, T, B0) for tests.
struct SiteDraw {
    TransitionVector p;
    double T = 0.0;
    int i0 = -1;             // Expl: favoured-against direction index
    unsigned basisSigns = 0; // TrapSym/TrapTransient: bit i set <=> B0 contains -e_i
};

SiteDraw draw_site(const SiteLaw& law, CounterStream& stream);

class Environment {
public:
    Environment(SiteLaw law, std::uint64_t masterSeed);

    TransitionVector transitions_at(const Site& x) const { return draw_at(x).p; }
    SiteDraw draw_at(const Site& x) const;

    int dim() const { return dim_; }
    const SiteLaw& law() const { return law_; }
    std::uint64_t seed() const { return seed_; }

private:
    SiteLaw law_;
    std::uint64_t seed_;
    std::uint64_t tag_;
    int dim_;
};

struct EllipticityReport {
    std::size_t samples = 0;
    double minEntry = 0.0;
    double maxEntry = 0.0;
    std::vector<double> kappaGrid;
    std::vector<double> fractionElliptic;  // P[site is kappa-elliptic] per grid point
    double kappa0 = 0.0;  // largest grid kappa with fraction > 1/2
    bool allPositive = false;
    bool uniformlyEllipticHint = false;  // min entry bounded away from zero on the sample
    std::vector<double> meanEntries;
};

/// kappa-elliptic: every p(e) in (kappa, 1 - kappa).
EllipticityReport ellipticity_profile(const Environment& env, std::size_t samples);

}  // namespace rwre
