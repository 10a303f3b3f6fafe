#include "rwre/walk.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace rwre {

namespace {

void require_horizon(std::uint64_t horizon) {
    if (horizon < 1) throw ParameterError("stop spec: horizon must be at least 1");
}

}  // namespace

StopSpec StopSpec::hit(SitePredicate target, std::uint64_t horizon) {
    require_horizon(horizon);
    return {{{StopCondition::Kind::Hit, std::move(target)}}, horizon};
}

StopSpec StopSpec::exit_of(SitePredicate set, std::uint64_t horizon) {
    require_horizon(horizon);
    return {{{StopCondition::Kind::Exit, std::move(set)}}, horizon};
}

StopSpec StopSpec::first_of(std::vector<StopCondition> conditions, std::uint64_t horizon) {
    require_horizon(horizon);
    return {std::move(conditions), horizon};
}

StopSpec StopSpec::budget(std::uint64_t horizon) {
    require_horizon(horizon);
    return {{}, horizon};
}

std::vector<Site> Trajectory::positions() const {
    std::vector<Site> out;
    out.reserve(steps.size() + 1);
    Site x = start;
    out.push_back(x);
    for (auto e : steps) {
        x = step(x, e);
        out.push_back(x);
    }
    return out;
}

Trajectory run(const Environment& env, const Site& start, const StopSpec& stop, std::uint64_t walkSeed) {
    require_horizon(stop.horizon);
    if (start.dim != env.dim()) throw ParameterError("run: start site has wrong dimension");

    Trajectory t;
    t.start = start;
    t.horizon = stop.horizon;
    Walker w(env, start, walkSeed);

    auto check = [&](const Site& x) {
        for (std::size_t i = 0; i < stop.conditions.size(); ++i) {
            const auto& c = stop.conditions[i];
            if (c.satisfied(x)) {
                t.condition = static_cast<int>(i);
                t.terminatedBy = c.kind == StopCondition::Kind::Hit ? Termination::HitTarget : Termination::ExitedSet;
                return true;
            }
        }
        return false;
    };

    if (!check(start)) {
        while (w.steps() < stop.horizon) {
            t.steps.push_back(static_cast<std::uint8_t>(w.advance()));
            if (check(w.position())) break;
        }
    }
    t.end = w.position();
    return t;
}

double BinomialTally::estimate() const {
    const auto n = resolved();
    return n == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(n);
}

std::pair<double, double> BinomialTally::interval(double z) const {
    const auto n = resolved();
    if (n == 0) return {0.0, 1.0};
    const double p = estimate();
    const double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

BinomialTally& BinomialTally::merge(const BinomialTally& o) {
    successes += o.successes;
    failures += o.failures;
    censored += o.censored;
    return *this;
}

BinomialTally hit_before_return(const Environment& env, const Site& x, const SitePredicate& target,
                                const Site& forbiddenReturn, std::uint64_t horizon, std::uint64_t runs,
                                std::uint64_t seed) {
    if (target(x)) throw ParameterError("hit_before_return: start must lie outside the target");
    require_horizon(horizon);
    BinomialTally tally;
    for (std::uint64_t r = 0; r < runs; ++r) {
        Walker w(env, x, derive_seed(seed, 0, r));
        bool resolved = false;
        while (w.steps() < horizon) {
            w.advance();
            if (target(w.position())) {
                ++tally.successes;
                resolved = true;
                break;
            }
            if (w.position() == forbiddenReturn) {
                ++tally.failures;
                resolved = true;
                break;
            }
        }
        if (!resolved) ++tally.censored;
    }
    return tally;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const int d = traj.start.dim;
    os << "step";
    for (int i = 1; i <= d; ++i) os << ",x_" << i;
    os << '\n';
    std::size_t n = 0;
    for (const auto& x : traj.positions()) {
        os << n++;
        for (int i = 0; i < d; ++i) os << ',' << x[i];
        os << '\n';
    }
}

}  // namespace rwre
