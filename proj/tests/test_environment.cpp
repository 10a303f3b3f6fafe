#include "doctest.h"

#include <cmath>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/stats.hpp"

using namespace rwre;

namespace {

std::vector<SiteLaw> all_laws() {
    return {law::UniformDrift{2, 0.1, 0, 0.5}, law::Expl{2, 0.2}, law::Expl{3, 0.3}, law::TrapSym{2},
            law::TrapTransient{1}, law::TrapTransient{2}, law::Dirichlet{{1, 2, 0.5, 1, 1, 3}},
            law::TableMixture{{0.3, 0.7}, {TransitionVector::from({0.5, 0.5, 0, 0}), TransitionVector::uniform(2)}}};
}

}  // namespace

TEST_CASE("transition vector construction") {
    const auto t = TransitionVector::from({0.1, 0.2, 0.3, 0.4 + 1e-11});
    double s = 0.0;
    for (int e = 0; e < 4; ++e) s += t[e];
    CHECK(std::abs(s - 1.0) < 1e-12);
    CHECK_THROWS_AS(TransitionVector::from({0.1, 0.2, 0.3, 0.5}), ParameterError);
    CHECK_THROWS_AS(TransitionVector::from({-0.1, 0.6, 0.3, 0.2}), ParameterError);
    CHECK(t.sample(0.05) == 0);
    CHECK(t.sample(0.25) == 1);
    CHECK(t.sample(0.999) == 3);
    CHECK(TransitionVector::uniform(3).min_entry() == doctest::Approx(1.0 / 6));
}

TEST_CASE("uniform law is constant") {
    const Environment env(law::UniformDrift{2, 0.25, 0, 0.0}, 9);
    for (int x = -5; x <= 5; ++x)
        for (int y = -5; y <= 5; ++y) CHECK(env.transitions_at(Site{x, y}) == TransitionVector::uniform(2));
}

TEST_CASE("determinism and site independence of keys") {
    for (const auto& law : all_laws()) {
        const Environment a(law, 123), b(law, 123), c(law, 124);
        const int d = a.dim();
        Site x(d);
        x[0] = 7;
        CHECK(a.transitions_at(x) == b.transitions_at(x));
        CHECK(a.transitions_at(x) == a.transitions_at(x));
        if (!std::holds_alternative<law::UniformDrift>(law) && !std::holds_alternative<law::TableMixture>(law)) {
            CHECK_FALSE(a.transitions_at(x) == c.transitions_at(x));
            CHECK_FALSE(a.transitions_at(x) == a.transitions_at(Site::zero(d)));
        }
    }
}

TEST_CASE("simplex and ellipticity over many sites") {
    for (const auto& law : all_laws()) {
        const Environment env(law, 5);
        const int d = env.dim();
        const bool elliptic = law_is_elliptic(law);
        for (int i = 0; i < 20000; ++i) {
            Site x(d);
            x[0] = i;
            x[d - 1] += i % 7;
            const auto p = env.transitions_at(x);
            double s = 0.0;
            for (int e = 0; e < 2 * d; ++e) s += p[e];
            REQUIRE(std::abs(s - 1.0) < 1e-12);
            if (elliptic) REQUIRE(p.min_entry() > 0.0);
        }
    }
}

TEST_CASE("neighbouring sites are uncorrelated") {
    const Environment env(law::Dirichlet{{1, 1, 1, 1}}, 77);
    const int n = 50000;
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i) {
        a.push_back(env.transitions_at(Site{2 * i, 0})[0]);
        b.push_back(env.transitions_at(Site{2 * i + 1, 0})[0]);
    }
    double ma = 0, mb = 0;
    for (int i = 0; i < n; ++i) ma += a[i] / n, mb += b[i] / n;
    double sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 4.0 / std::sqrt(n));
    CHECK(ma == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("expl law") {
    for (int d : {2, 3}) {
        const double eps = 1.0 / (2 * d + 1) + 0.05;
        const Environment env(law::Expl{d, eps}, 31);
        std::vector<double> counts(static_cast<std::size_t>(2 * d), 0.0);
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            Site x(d);
            x[0] = i;
            const auto s = env.draw_at(x);
            double pos = 0.0;
            for (int e = 0; e < d; ++e) pos += s.p[e];
            REQUIRE(std::abs(pos - (1.0 - eps)) < 1e-12);
            REQUIRE(s.T >= 2 * d + 1);
            REQUIRE(s.p[s.i0] == 1.0 / s.T);
            counts[static_cast<std::size_t>(s.i0)] += 1.0;
        }
        const auto chi = stats::chi_square_gof(counts, std::vector<double>(static_cast<std::size_t>(2 * d), 1.0 / (2 * d)));
        CHECK(chi.pValue > 0.001);
    }
    CHECK_THROWS_AS(validate(law::Expl{2, 0.8}), ParameterError);
    CHECK_THROWS_AS(validate(law::Expl{2, 0.1}), ParameterError);
    CHECK_THROWS_AS(validate(law::Expl{1, 0.4}), ParameterError);
    CHECK_NOTHROW(validate(law::Expl{2, 0.2}));
}

TEST_CASE("expl T sampler") {
    CHECK(sample_expl_T(1.0, 2) == 5.0);
    CHECK(sample_expl_T(0.5, 2) == doctest::Approx(20480.0));
    std::vector<double> t;
    CounterStream s(99);
    for (int i = 0; i < 1000000; ++i) t.push_back(sample_expl_T(s.uniform(), 2));
    const auto h = stats::hill(t);
    CHECK(h.index == doctest::Approx(1.0 / 12).epsilon(0.2));
}

TEST_CASE("trap T sampler") {
    CHECK(sample_trap_T(1.0, 2) == 0.5);
    CHECK(sample_trap_T(0.5, 2) == doctest::Approx(1.0 / 32));
    CHECK(sample_trap_T_tail(0.5, 0.25) == sample_trap_T(0.5, 2));
    CHECK(trap_tail(3, 0.0) == 0.125);
    CounterStream s(5);
    const int n = 200000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += 1.0 / sample_trap_T(s.uniform(), 2) >= 100.0;
    const double p = std::pow(0.02, 0.25);
    CHECK(std::abs(hits / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("trap laws") {
    const Environment sym(law::TrapSym{2}, 3);
    const Environment tr(law::TrapTransient{2}, 3);
    for (int i = 0; i < 5000; ++i) {
        const auto s = sym.draw_at(Site{i, 0});
        for (int a = 0; a < 2; ++a) {
            const bool neg = (s.basisSigns >> a) & 1u;
            const int inB = neg ? a + 2 : a;
            REQUIRE(s.p[inB] == doctest::Approx(s.T / 2));
            REQUIRE(s.p[(inB + 2) % 4] == doctest::Approx((1 - s.T) / 2));
        }
        const auto q = tr.draw_at(Site{i, 0, 0});
        REQUIRE(q.p[2] == doctest::Approx(2.0 * q.p[5]).epsilon(1e-12));
        // C(T,d) in [d, 2(d+1)]: up-weight 2T over C.
        const double C = 2.0 * q.T / q.p[2];
        REQUIRE(C >= 2.0 - 1e-9);
        REQUIRE(C <= 6.0 + 1e-9);
    }
    CHECK(lattice_dim(law::TrapTransient{1}) == 2);
}

TEST_CASE("ellipticity profile") {
    const auto u = ellipticity_profile(Environment(law::UniformDrift{2, 0.25, 0, 0.0}, 1), 100);
    CHECK(u.allPositive);
    CHECK(u.uniformlyEllipticHint);
    CHECK(u.kappa0 < 0.25);
    CHECK(u.kappa0 > 0.2);

    const auto e = ellipticity_profile(Environment(law::Expl{2, 0.2}, 1), 100000);
    CHECK(e.allPositive);
    CHECK_FALSE(e.uniformlyEllipticHint);
    CHECK(e.minEntry < 1e-6);

    const auto v1 = TransitionVector::from({0.7, 0.1, 0.1, 0.1});
    const auto v2 = TransitionVector::from({0.1, 0.1, 0.1, 0.7});
    const auto m = ellipticity_profile(Environment(law::TableMixture{{0.25, 0.75}, {v1, v2}}, 2), 40000);
    const double expect0 = 0.25 * 0.7 + 0.75 * 0.1;
    const double sd = std::sqrt(0.25 * 0.75 / 40000) * 0.6;
    CHECK(std::abs(m.meanEntries[0] - expect0) < 4 * sd);
    CHECK(std::abs(m.meanEntries[3] - (0.25 * 0.1 + 0.75 * 0.7)) < 4 * sd);
}

TEST_CASE("law validation") {
    CHECK_THROWS_AS(validate(law::Dirichlet{{1, 0, 1, 1}}), ParameterError);
    CHECK_THROWS_AS(validate(law::Dirichlet{{1, 1, 1}}), ParameterError);
    CHECK_THROWS_AS(validate(law::UniformDrift{2, 0.3, 0, 0.0}), ParameterError);
    CHECK_THROWS_AS(Environment(law::TrapSym{0}, 1), ParameterError);
    CHECK_THROWS_AS(validate(law::TableMixture{{1.0}, {}}), ParameterError);
}
