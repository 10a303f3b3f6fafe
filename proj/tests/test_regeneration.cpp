#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rwre/hypercube.hpp"
#include "rwre/regeneration.hpp"

using namespace rwre;

namespace {

Environment constant_env(std::initializer_list<double> p) {
    return Environment(law::TableMixture{{1.0}, {TransitionVector::from(p)}}, 1);
}

Trajectory path(const Site& start, const std::vector<int>& dirs) {
    Trajectory t;
    t.start = start;
    t.end = start;
    for (int e : dirs) {
        t.steps.push_back(static_cast<std::uint8_t>(e));
        t.end = step(t.end, e);
    }
    t.horizon = dirs.size();
    return t;
}

double survival(const std::vector<double>& xs, double n) {
    return static_cast<double>(std::count_if(xs.begin(), xs.end(), [n](double x) { return x >= n; })) /
           static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("deterministic forward walk") {
    const auto env = constant_env({1, 0, 0, 0});
    const auto traj = run(env, Site{0, 0}, StopSpec::budget(40), 1);
    RegenParams p{{1.0, 0.0}, 3.0, 4};
    p.validate();
    const auto rec = extract(traj, p);
    REQUIRE(rec.points.size() >= 9);
    CHECK(rec.points[0].time == 4);
    CHECK(rec.points[0].position == Site{4, 0});
    for (std::size_t k = 1; k < rec.points.size(); ++k) CHECK(rec.points[k].time - rec.points[k - 1].time == 4);
    CHECK_FALSE(rec.droppedBelowStart);
    // The last candidates lie inside the final W steps and stay uncertified.
    CHECK(rec.certified() == 9);
    CHECK_FALSE(rec.points[9].certified);

    for (auto r : regeneration_radii(rec, traj)) CHECK(r == 4);

    std::vector<RegenerationRecord> many(40, rec);
    const auto v = renewal_velocity(many, {1.0, 0.0});
    CHECK(v.v == RealVec{1.0, 0.0});
    CHECK(v.along.mean == 1.0);
    CHECK(v.directAlong.mean == 1.0);
    CHECK(v.intervals == 40 * 8);
}

TEST_CASE("backtracking trajectories have no certified regeneration") {
    // Four steps up, five down, repeatedly: every level is revisited from below the start.
    std::vector<int> dirs;
    for (int k = 0; k < 10; ++k) {
        for (int i = 0; i < 4; ++i) dirs.push_back(0);
        for (int i = 0; i < 5; ++i) dirs.push_back(2);
    }
    RegenParams p{{1.0, 0.0}, 3.0, 1};
    const auto rec = extract(path(Site{0, 0}, dirs), p);
    CHECK(rec.certified() == 0);
    CHECK(rec.droppedBelowStart);
    CHECK(rec.D == 9);

    CHECK(extract(path(Site{0, 0}, {0, 0}), p).points.empty());
}

TEST_CASE("parameter checks") {
    const double s2 = std::sqrt(2.0);
    CHECK_NOTHROW(RegenParams::defaults({1.0, 0.0}).validate());
    CHECK(RegenParams::defaults({1.0, 0.0}).a == doctest::Approx(3 * s2));
    CHECK_THROWS_AS((RegenParams{{1.0, 0.0}, 2.0, 0}.validate()), ParameterError);
    CHECK_THROWS_AS((RegenParams{{1.0, 0.0}, 15.0, 0}.validate()), ParameterError);
    CHECK_NOTHROW((RegenParams{{1.0, 0.0}, 2.0, 0}.validate(true)));
    CHECK_THROWS_AS((RegenParams{{1.0, 1.0}, 4.0, 0}.validate()), ParameterError);
    CHECK_THROWS_AS(renewal_velocity({}, {1.0, 0.0}), InsufficientData);

    const auto env = constant_env({1, 0, 0, 0});
    const auto rec = extract(run(env, Site{0, 0}, StopSpec::budget(40), 1), RegenParams{{1.0, 0.0}, 3.0, 4});
    CHECK_THROWS_AS(renewal_velocity({rec}, {1.0, 0.0}), InsufficientData);
}

TEST_CASE("expl renewal identity and consistency") {
    const RealVec ell{M_SQRT1_2, M_SQRT1_2};
    const auto res = simulate_regenerations(law::Expl{2, 0.2}, RegenParams::defaults(ell), 20000, 100, 11);
    const auto v = renewal_velocity(res.records, {1.0, 1.0});
    CHECK(v.along.mean == doctest::Approx(0.6).epsilon(0.02));
    // Renewal and direct estimates agree within the combined interval.
    const double half = (v.along.ci.hi - v.along.ci.lo) / 2 + (v.directAlong.ci.hi - v.directAlong.ci.lo) / 2;
    CHECK(std::abs(v.along.mean - v.directAlong.mean) <= half);

    std::vector<double> all;
    for (const auto& t : inter_times(res.records)) all.insert(all.end(), t.begin(), t.end());
    const auto h = stats::hill(all);
    CHECK(std::isfinite(h.index));
    CHECK(h.ci.lo > 1.0);
}

TEST_CASE("drifted uniformly elliptic law") {
    const RealVec ell{1.0, 0.0};
    const auto law = law::UniformDrift{2, 0.1, 0, 3.0};
    const auto res = simulate_regenerations(law, RegenParams::defaults(ell), 20000, 100, 5);
    const auto v = renewal_velocity(res.records, ell);
    const double half = (v.along.ci.hi - v.along.ci.lo) / 2 + (v.directAlong.ci.hi - v.directAlong.ci.lo) / 2;
    CHECK(std::abs(v.along.mean - v.directAlong.mean) <= half);

    std::vector<double> times, firstHalf, secondHalf;
    for (const auto& t : inter_times(res.records)) {
        times.insert(times.end(), t.begin(), t.end());
        firstHalf.insert(firstHalf.end(), t.begin(), t.begin() + static_cast<long>(t.size() / 2));
        secondHalf.insert(secondHalf.end(), t.begin() + static_cast<long>(t.size() / 2), t.end());
    }
    CHECK(stats::hill(times).ci.lo > 2.0);
    CHECK_FALSE(stats::ks_two_sample(firstHalf, secondHalf).reject());

    // Tail of the regeneration radii decays at least exponentially.
    std::vector<double> radii;
    for (const auto& r : res.radii)
        for (std::size_t k = 1; k < r.size(); ++k) radii.push_back(static_cast<double>(r[k]));
    std::vector<double> x, y, w;
    for (double r = 5; r <= 40; r += 5) {
        const double s = survival(radii, r);
        if (s >= 1.0) continue;
        if (s * radii.size() < 20) break;
        x.push_back(r);
        y.push_back(std::log(s));
        w.push_back(s * radii.size() / (1 - s));
    }
    REQUIRE(x.size() >= 3);
    CHECK(stats::weighted_line_fit(x, y, w).slopeCi.hi < 0.0);
}

TEST_CASE("0-regen rejection and the trap lower bound") {
    const auto law = law::Dirichlet{{3, 1, 1, 1}};
    const auto res = simulate_regenerations(law, RegenParams::defaults({1.0, 0.0}), 5000, 400, 21);
    const auto kept = zero_regen(res.records);
    REQUIRE(kept.size() > 50);
    CHECK(kept.size() < res.records.size());
    for (const auto& r : kept) CHECK_FALSE(r.droppedBelowStart);
    const auto tau1 = first_regeneration_times(kept);
    REQUIRE(tau1.size() > 50);

    const auto cube = UnitHypercube::at(Site{0, 0});
    std::vector<std::vector<double>> exits(4);
    for (std::uint64_t r = 0; r < 2000; ++r) {
        const Environment env(law, replicate_seed(99, r));
        for (std::size_t c = 0; c < 4; ++c) {
            const auto s = sample_exit_times(env, cube, c, 1, derive_seed(99, r, c), 1000000);
            exits[c].insert(exits[c].end(), s.times.begin(), s.times.end());
        }
    }
    // P[tau_1 >= n | 0-regen] >= c max_x P_x[T_ex >= n] with one c > 0 across the grid.
    double c = INFINITY;
    int points = 0;
    for (double n : {2.0, 4.0, 8.0, 16.0}) {
        double m = 0.0;
        for (const auto& e : exits) m = std::max(m, survival(e, n));
        if (m == 0.0) continue;
        ++points;
        c = std::min(c, survival(tau1, n) / m);
    }
    CHECK(points >= 3);
    CHECK(c > 0.0);
}

TEST_CASE("regeneration CSV") {
    const auto env = constant_env({1, 0, 0, 0});
    const auto rec = extract(run(env, Site{0, 0}, StopSpec::budget(12), 1), RegenParams{{1.0, 0.0}, 3.0, 4});
    std::ostringstream os;
    write_regenerations_csv(os, {rec});
    CHECK(os.str() == "walk,k,tau,x_1,x_2,censored\n0,1,4,4,0,0\n0,2,8,8,0,0\n0,3,12,12,0,1\n");
}
