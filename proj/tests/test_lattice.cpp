#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>

#include "rwre/lattice.hpp"

using namespace rwre;

namespace {

std::set<Site> as_set(const std::vector<Site>& v) { return {v.begin(), v.end()}; }

RealVec random_unit(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> g;
    RealVec v(static_cast<std::size_t>(d));
    double n = 0.0;
    for (auto& x : v) {
        x = g(rng);
        n += x * x;
    }
    for (auto& x : v) x /= std::sqrt(n);
    return v;
}

}  // namespace

TEST_CASE("directions") {
    const Direction e{0, 3}, f{4, 3};
    CHECK(e.vector() == Site{1, 0, 0});
    CHECK(f.vector() == Site{0, -1, 0});
    CHECK(e.opposite().index == 3);
    CHECK(f.opposite().index == 1);
    CHECK(direction_index(Site{0, 0, -1}) == 5);
    CHECK(direction_index(Site{1, 1, 0}) == -1);
    for (int i = 0; i < 6; ++i) {
        const Direction d{i, 3};
        CHECK(d.vector().norm1() == 1);
        CHECK(d.opposite().vector() == -d.vector());
        CHECK(step(Site::zero(3), i) == d.vector());
    }
}

TEST_CASE("build_basis orders by projection") {
    auto idx = [](const DirectionBasis& b) {
        std::vector<int> v;
        for (const auto& e : b.ordered) v.push_back(e.index);
        return v;
    };
    CHECK(idx(build_basis({1.0, 0.0}, 2)) == std::vector<int>{0, 1, 2, 3});
    const auto b = build_basis({0.6, 0.8}, 2);
    CHECK(b.ordered[0].index == 1);
    CHECK(b.ordered[1].index == 0);

    // Exact tie: smallest axis first, positive sign preferred.
    const double r = 1.0 / std::sqrt(2.0);
    const auto t = build_basis({r, -r}, 2);
    CHECK(t.ordered[0].index == 0);
    CHECK(t.ordered[1].index == 3);
    CHECK(t.ordered[0].dot(t.ell) == doctest::Approx(r));
    CHECK(t.ordered[1].dot(t.ell) == doctest::Approx(r));

    CHECK_THROWS_AS(build_basis({0.0, 0.0}, 2), ParameterError);
    CHECK_THROWS_AS(build_basis({1.0, 1.0}, 2), ParameterError);
    CHECK_THROWS_AS(build_basis({1.0, 0.0}, 3), ParameterError);
}

TEST_CASE("build_basis invariants over random directions") {
    std::mt19937_64 rng(7);
    for (int d = 1; d <= 6; ++d)
        for (int rep = 0; rep < 200; ++rep) {
            const auto ell = random_unit(rng, d);
            const auto b = build_basis(ell, d);
            REQUIRE(b.ordered.size() == static_cast<std::size_t>(2 * d));
            CHECK(b.ordered[0].dot(ell) >= 1.0 / std::sqrt(d) - 1e-12);
            for (int i = 0; i < d; ++i) {
                CHECK(b.ordered[static_cast<std::size_t>(i)].dot(ell) >= 0.0);
                if (i + 1 < d)
                    CHECK(b.ordered[static_cast<std::size_t>(i)].dot(ell) >=
                          b.ordered[static_cast<std::size_t>(i + 1)].dot(ell));
                CHECK(b.ordered[static_cast<std::size_t>(i + d)] == b.ordered[static_cast<std::size_t>(i)].opposite());
            }
        }
}

TEST_CASE("hypercubes") {
    const auto h = UnitHypercube::at(Site{0, 0});
    CHECK(h.size() == 4);
    CHECK(h.corner(3) == Site{1, 1});
    CHECK(h.mask_of(Site{0, 1}) == 2);
    CHECK_THROWS_AS(h.mask_of(Site{2, 0}), ParameterError);
    CHECK(h.exterior_directions(0) == std::vector<int>{2, 3});
    CHECK(h.interior_directions(0) == std::vector<int>{0, 1});
    for (const auto& c : h.corners()) CHECK((c - h.anchor).norm_inf() <= 1);

    auto anchors = [](const Site& x) {
        std::set<Site> s;
        for (const auto& c : hypercubes_containing(x)) {
            CHECK(c.contains(x));
            s.insert(c.anchor);
        }
        return s;
    };
    CHECK(anchors(Site{0}) == std::set<Site>{Site{0}, Site{-1}});
    CHECK(anchors(Site{0, 0}) == std::set<Site>{Site{0, 0}, Site{-1, 0}, Site{0, -1}, Site{-1, -1}});
    CHECK(anchors(Site{1, 1, 1}).size() == 8);
}

TEST_CASE("boundary_towards") {
    const auto sq = UnitHypercube::at(Site{0, 0}).corners();
    CHECK(as_set(boundary_towards(Site{0, 0}, sq)) == std::set<Site>{Site{-1, 0}, Site{0, -1}});
    CHECK(as_set(boundary_towards(Site{1, 1}, sq)) == std::set<Site>{Site{2, 1}, Site{1, 2}});
    CHECK(boundary_towards(Site{0, 0, 0}, UnitHypercube::at(Site::zero(3)).corners()).size() == 3);
    CHECK_THROWS_AS(boundary_towards(Site{5, 5}, sq), ParameterError);
    CHECK(outer_boundary(sq).size() == 8);
}

TEST_CASE("projection") {
    auto p = project(Site{3, 2}, {1.0, 0.0});
    CHECK(p.P == RealVec{3.0, 0.0});
    CHECK(p.Q == RealVec{0.0, 2.0});

    const double r = 1.0 / std::sqrt(2.0);
    p = project(Site{2, 0}, {r, r});
    CHECK(p.P[0] == doctest::Approx(2.0));
    CHECK(p.P[1] == doctest::Approx(2.0));
    CHECK(p.Q[0] == doctest::Approx(0.0));
    CHECK(p.Q[1] == doctest::Approx(-2.0));

    p = project(Site{0, 5}, {r, r});
    CHECK(p.P[0] == 0.0);
    CHECK(p.Q == RealVec{0.0, 5.0});

    const auto ax = nearest_axis({-0.8, 0.6});
    CHECK(ax.axis == 0);
    CHECK(ax.sign == -1);
    CHECK(ax.cosine == doctest::Approx(0.8));
    CHECK_THROWS(project(Site{1, 1}, {0.0, 0.0}));

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> c(-20, 20);
    for (int rep = 0; rep < 100; ++rep) {
        const auto v = random_unit(rng, 3);
        const Site z{c(rng), c(rng), c(rng)};
        const auto q = project(z, v);
        for (int i = 0; i < 3; ++i) CHECK(q.P[static_cast<std::size_t>(i)] + q.Q[static_cast<std::size_t>(i)] == doctest::Approx(z[i]));
    }
}

TEST_CASE("tilted box bounds") {
    const TiltedBox b(Site{0, 0}, 0.5, 16.0, {1.0, 0.0});  // side L^beta = 4
    CHECK(b.contains(Site{0, 0}));
    CHECK(b.contains(Site{15, 3}));
    CHECK_FALSE(b.contains(Site{16, 0}));
    CHECK_FALSE(b.contains(Site{0, 4}));
    CHECK_FALSE(b.contains(Site{-4, 0}));
    CHECK(b.contains(Site{-3, 0}));
    CHECK(b.on_front_boundary(Site{16, 2}));
    CHECK_FALSE(b.on_front_boundary(Site{15, 2}));
    CHECK_THROWS_AS(TiltedBox(Site{0, 0}, 1.0, 16.0, {1.0, 0.0}), ParameterError);

    // Elementary geometry: ||x1 - x2||_inf <= (1 + sqrt d) L^beta.
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const auto v = random_unit(rng, 2);
        const TiltedBox box(Site{0, 0}, 0.5, 25.0, v);
        for (int x = -30; x <= 30; ++x)
            for (int y = -30; y <= 30; ++y) {
                const Site z{x, y};
                if (box.contains(z) && dot(z, v) <= 0.0) CHECK(z.norm_inf() <= (1.0 + std::sqrt(2.0)) * 5.0 + 1e-9);
            }
    }
}

TEST_CASE("slab box rotation") {
    std::mt19937_64 rng(5);
    for (int d = 2; d <= 5; ++d)
        for (int rep = 0; rep < 20; ++rep) {
            const auto ell = random_unit(rng, d);
            const auto R = rotation_to(ell);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < d; ++k) s += R.at(k, i) * R.at(k, j);
                    CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-10);
                }
            RealVec e1(static_cast<std::size_t>(d), 0.0);
            e1[0] = 1.0;
            const auto img = R.apply(e1);
            for (int i = 0; i < d; ++i) CHECK(std::abs(img[static_cast<std::size_t>(i)] - ell[static_cast<std::size_t>(i)]) < 1e-10);
        }

    const SlabBox box({1.0, 0.0}, 4.0, 2.0, 3.0);
    CHECK(box.contains(Site{3, 2}));
    CHECK_FALSE(box.contains(Site{4, 0}));
    CHECK_FALSE(box.contains(Site{-2, 0}));
    CHECK(box.contains(Site{-1, -2}));
    CHECK_FALSE(box.contains(Site{0, 3}));

    const Slab slab({0.0, 1.0}, 1.0, 8.0);
    CHECK(slab.contains(Site{100, 8}));
    CHECK(slab.contains(Site{-100, -8}));
    CHECK_FALSE(slab.contains(Site{0, 9}));
    CHECK_FALSE(slab.contains(Site{0, -9}));
}

TEST_CASE("trap collar") {
    for (int d = 2; d <= 4; ++d) {
        const auto c = trap_collar(d);
        CHECK(c.connected);
        CHECK(c.contains_cube_boundary);
        CHECK(c.disjoint_from_cube);
        CHECK(c.B.size() == static_cast<std::size_t>(d));
        for (const auto& z : c.A) CHECK_FALSE(c.cube.contains(z));
        RealVec ell(static_cast<std::size_t>(d), 0.0);
        ell[0] = 1.0;
        CHECK(collar_min_level(c, ell) > 0.0);

        // Independent connectivity check of A u B.
        const auto all = as_set(c.A);
        std::set<Site> nodes = all;
        nodes.insert(c.B.begin(), c.B.end());
        std::set<Site> seen{*nodes.begin()};
        std::queue<Site> q;
        q.push(*nodes.begin());
        while (!q.empty()) {
            const Site x = q.front();
            q.pop();
            for (int e = 0; e < 2 * d; ++e) {
                const Site y = step(x, e);
                if (nodes.count(y) && seen.insert(y).second) q.push(y);
            }
        }
        CHECK(seen.size() == nodes.size());
    }
    // In d=1 the ring {0, 3} around {1, 2} falls apart and touches level 0.
    const auto c1 = trap_collar(1);
    CHECK(c1.B == std::vector<Site>{Site{0}});
    CHECK(as_set(c1.A) == std::set<Site>{Site{0}, Site{3}});
    CHECK_FALSE(c1.connected);
    CHECK(c1.contains_cube_boundary);
    const auto c2 = trap_collar(2);
    CHECK(c2.B == std::vector<Site>{Site{0, 0}, Site{1, 0}});
    CHECK(c2.A.size() == 12);
}
