#pragma once

// Quenched Markov chain simulation with hitting / exit instrumentation.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/lattice.hpp"
#include "rwre/random.hpp"

namespace rwre {

using SitePredicate = std::function<bool(const Site&)>;

struct StopCondition {
    enum class Kind { Hit, Exit };
    Kind kind = Kind::Hit;
    SitePredicate set;

    bool satisfied(const Site& x) const { return kind == Kind::Hit ? set(x) : !set(x); }
};

/// Stop at the first n >= 0 at which any condition holds, or after
/// `horizon` steps.
struct StopSpec {
    std::vector<StopCondition> conditions;
    std::uint64_t horizon = 1;

    static StopSpec hit(SitePredicate target, std::uint64_t horizon);
    static StopSpec exit_of(SitePredicate set, std::uint64_t horizon);
    static StopSpec first_of(std::vector<StopCondition> conditions, std::uint64_t horizon);
    static StopSpec budget(std::uint64_t horizon);
};

enum class Termination { HitTarget, ExitedSet, BudgetExhausted };

struct Trajectory {
    Site start;
    std::vector<std::uint8_t> steps;  // direction indices
    std::uint64_t horizon = 0;
    Termination terminatedBy = Termination::BudgetExhausted;
    int condition = -1;  // index of the condition that fired
    Site end;

    std::size_t length() const { return steps.size(); }
    std::vector<Site> positions() const;
};

/// Step-by-step quenched walker; the n-th step consumes the uniform keyed by
/// (walkSeed, n).
class Walker {
public:
    Walker(const Environment& env, Site start, std::uint64_t walkSeed)
        : env_(&env), pos_(std::move(start)), key_(mix64(walkSeed)) {}

    int advance() {
        const double u = to_open_unit(chain(key_, n_++));
        const int e = env_->transitions_at(pos_).sample(u);
        const int d = pos_.dim;
        pos_[e % d] += e < d ? 1 : -1;
        return e;
    }

    const Site& position() const { return pos_; }
    std::uint64_t steps() const { return n_; }

private:
    const Environment* env_;
    Site pos_;
    std::uint64_t key_;
    std::uint64_t n_ = 0;
};

Trajectory run(const Environment& env, const Site& start, const StopSpec& stop, std::uint64_t walkSeed);

/// Binomial counts with censored runs kept apart. Merging is associative.
struct BinomialTally {
    std::uint64_t successes = 0;
    std::uint64_t failures = 0;
    std::uint64_t censored = 0;

    std::uint64_t resolved() const { return successes + failures; }
    double estimate() const;
    /// Wald interval at z standard errors, clipped to [0, 1].
    std::pair<double, double> interval(double z = 1.96) const;
    BinomialTally& merge(const BinomialTally& o);
};

/// MC estimate of P_x[T_target < T_forbidden^+] over `runs` walks.
BinomialTally hit_before_return(const Environment& env, const Site& x, const SitePredicate& target,
                                const Site& forbiddenReturn, std::uint64_t horizon, std::uint64_t runs,
                                std::uint64_t seed);

/// CSV dump with header step,x_1,...,x_d.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace rwre
