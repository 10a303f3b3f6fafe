#include "doctest.h"

#include <cmath>

#include "rwre/criteria.hpp"
#include "rwre/discovery.hpp"
#include "rwre/hypercube.hpp"

using namespace rwre;
using namespace rwre::criteria;

namespace {

SiteLaw fixed_law(std::initializer_list<double> p) { return law::TableMixture{{1.0}, {TransitionVector::from(p)}}; }

const SiteLaw kUniform2 = law::UniformDrift{2, 0.25, 0, 0.0};

std::vector<double> const_phi(int d, double v) { return std::vector<double>(static_cast<std::size_t>(2 * d), v); }

// Reads a neighbour of the last discovered site before it is discovered.
class PeekingPolicy : public DiscoveryPolicy {
public:
    std::string name() const override { return "peeking"; }
    Site next(const std::vector<Site>& prefix, AuditedView& view) override {
        const Site y = step(prefix.back(), 0);
        view.read(y);
        return y;
    }
    std::vector<double> marks(const UnitHypercube& h, AuditedView&) override { return std::vector<double>(h.size(), 0.0); }
};

// Jumps to a site not adjacent to the prefix.
class JumpingPolicy : public DiscoveryPolicy {
public:
    std::string name() const override { return "jumping"; }
    Site next(const std::vector<Site>&, AuditedView&) override { return Site{1, 1}; }
    std::vector<double> marks(const UnitHypercube& h, AuditedView&) override { return std::vector<double>(h.size(), 0.0); }
};

double expected_mark_sum(const std::vector<double>& phi, int k) {
    const int d = static_cast<int>(phi.size()) / 2;
    double s = 0.0;
    for (double v : phi) s += v;
    const int e = k % d;
    return 2.0 * s - phi[static_cast<std::size_t>(e)] - phi[static_cast<std::size_t>(e + d)];
}

}  // namespace

TEST_CASE("eprime discovery on A_1") {
    const Environment env(kUniform2, 1);
    EprimePolicy pol(const_phi(2, 0.4), 1.0 / 8.0);
    const auto mmh = discover(env, pol);
    CHECK(mmh.event == 1);
    CHECK(mmh.x0 == Site::zero(2));
    CHECK(mmh.h.anchor == Site::zero(2));
    CHECK(mmh.v.back() == Site{1, 0});
    REQUIRE(mmh.log.size() == 3);
    CHECK(mmh.log[0].reads.size() == 1);
    CHECK(mmh.log[0].reads[0] == Site::zero(2));
    const auto g = gammas_from_phi(UnitHypercube::at(Site::zero(2)), const_phi(2, 0.4));
    CHECK(std::abs(mark_sum(mmh, g) - 2.4) < 1e-15);
}

TEST_CASE("eprime discovery on A_{d+1}") {
    const Environment env(fixed_law({0.05, 0.05, 0.8, 0.1}), 3);
    const std::vector<double> phi{0.3, 0.5, 0.2, 0.4};
    EprimePolicy pol(phi, 1.0 / 8.0);
    const auto mmh = discover(env, pol);
    CHECK(mmh.event == 3);
    CHECK(mmh.x0 == Site{-1, -1});
    CHECK(mmh.v.back() == Site{-1, 0});
    const auto g = gammas_from_phi(UnitHypercube::at(Site::zero(2)), phi);
    CHECK(std::abs(mark_sum(mmh, g) - 2.3) < 1e-12);
}

TEST_CASE("eprime mark sum over sampled environments in d = 2 and 3") {
    for (int d : {2, 3}) {
        const auto phi = const_phi(d, 0.4);
        const auto g = gammas_from_phi(UnitHypercube::at(Site::zero(d)), phi);
        std::vector<int> seen(static_cast<std::size_t>(2 * d + 1), 0);
        for (std::uint64_t s = 0; s < 300; ++s) {
            const Environment env(law::Dirichlet{std::vector<double>(static_cast<std::size_t>(2 * d), 0.3)}, s);
            EprimePolicy pol(phi, 1.0 / (4 * d));
            const auto mmh = discover(env, pol);
            ++seen[static_cast<std::size_t>(mmh.event)];
            CHECK(std::abs(mark_sum(mmh, g) - expected_mark_sum(phi, mmh.event - 1)) < 1e-12);
            for (std::size_t i = 0; i < mmh.log.size(); ++i)
                for (const auto& r : mmh.log[i].reads) CHECK(r == Site::zero(d));
        }
        CHECK(seen[1] > 0);
        CHECK(seen[static_cast<std::size_t>(d + 1)] > 0);
    }
}

TEST_CASE("fixed policy discovery and single-corner marks") {
    const Environment env(kUniform2, 2);
    std::vector<double> marks{2.0, 0.0, 0.0, 0.0};
    FixedPolicy pol(UnitHypercube::at(Site::zero(2)), marks);
    const auto mmh = discover(env, pol);
    CHECK(mmh.log.size() == 3);
    CHECK(mmh.marks == marks);
    CHECK(mark_sum(mmh, std::vector<double>(4, 0.0)) == 0.0);

    const double eps = 0.3;
    for (std::size_t m = 0; m < 4; ++m) {
        const auto spec = single_corner_spec(2, eps, m);
        auto p = spec.policy();
        const auto h = discover(env, *p);
        CHECK(std::abs(mark_sum(h, spec.gammas) - (1.0 + eps)) < 1e-15);
        CHECK(h.h.mask_of(Site::zero(2)) == m);
    }
}

TEST_CASE("discovery rules are enforced") {
    const Environment env(kUniform2, 2);
    PeekingPolicy peek;
    CHECK_THROWS_AS(discover(env, peek), MeasurabilityViolation);
    JumpingPolicy jump;
    CHECK_THROWS_AS(discover(env, jump), ParameterError);
    CHECK_THROWS_AS(EprimePolicy(const_phi(2, 0.4), 0.25), ParameterError);
}

TEST_CASE("path bundle on the uniform law") {
    const Environment env(kUniform2, 5);
    EprimePolicy pol(const_phi(2, 0.4), 1.0 / 8.0);
    const auto mmh = discover(env, pol);
    const auto b = paths(env, mmh, 2);
    REQUIRE(b.paths.size() == 4);
    CHECK(b.boundHolds);
    CHECK(b.disjoint);
    CHECK(b.distanceOk);
    const auto a = analyze(env, mmh.h);
    for (const auto& p : b.paths) {
        REQUIRE(p.Q.size() == 1);
        CHECK(p.Q[0] == doctest::Approx(0.25));
        CHECK(p.qtilde == doctest::Approx(a.Qtilde(0, static_cast<Eigen::Index>(p.corner))));
        CHECK(p.pi >= p.bound * (1 - 1e-12));
    }
    CHECK_THROWS_AS(paths(env, mmh, 0), ParameterError);
}

TEST_CASE("path bundle under a deterministic drift") {
    const Environment env(fixed_law({1, 0, 0, 0}), 1);
    FixedPolicy pol(UnitHypercube::at(Site::zero(2)), std::vector<double>(4, 0.0));
    const auto mmh = discover(env, pol);
    const auto b = paths(env, mmh, 6);
    const auto& p = b.paths[mmh.h.mask_of(Site{1, 0})];
    CHECK(p.exitProb == 1.0);
    CHECK(p.pi == 1.0);
    CHECK(p.ys.back() == Site{7, 0});
    CHECK(b.boundHolds);
    CHECK(b.distanceOk);
}

TEST_CASE("path bundle invariants on random environments") {
    for (std::uint64_t s = 0; s < 100; ++s)
        for (const SiteLaw& law : {SiteLaw{law::Expl{2, 0.2}}, SiteLaw{law::Dirichlet{{1, 1, 1, 1, 1, 1}}}}) {
            const Environment env(law, s);
            const int d = env.dim();
            EprimePolicy pol(const_phi(d, 0.4), 1.0 / (4 * d));
            const auto b = paths(env, discover(env, pol), 5);
            CHECK(b.boundHolds);
            CHECK(b.disjoint);
            CHECK(b.distanceOk);
        }
}

TEST_CASE("moment conditions on a uniformly elliptic law") {
    const SiteLaw law = law::UniformDrift{2, 0.2, 0, 0.0};
    const Sampling s{4000, 11};
    CHECK(condition_E0(law, s).verdict == Verdict::Satisfied);
    const auto ep = condition_Eprime(law, const_phi(2, 0.4), s);
    CHECK(ep.verdict == Verdict::Satisfied);
    // A passing (E')_1 carries over to the eprime (K)_1 report.
    const auto k = condition_K(law, eprime_spec(2, const_phi(2, 0.4), 1.0), s);
    CHECK(k.verdict == Verdict::Satisfied);
    CHECK(k.estimate("part3_min_mark_sum").value == doctest::Approx(2.4));
    CHECK_THROWS_AS(condition_Ktilde(law, 0.0, s), ParameterError);
    CHECK_THROWS_AS(eprime_spec(2, const_phi(2, 0.1), 1.0), ParameterError);
}

TEST_CASE("expl law separates (E')_1 from (K~)_1") {
    const SiteLaw law = law::Expl{2, 0.2};
    const Sampling s{10000, 5};
    const auto probe = condition_Eprime_probe(law, 0.0, s);
    CHECK(probe.params["exponent"].get<double>() == doctest::Approx(0.125));
    CHECK(probe.verdict == Verdict::Violated);
    const auto kt = condition_Ktilde(law, 1.0, s);
    CHECK(kt.verdict == Verdict::Satisfied);
    CHECK(kt.params["lower_bound_holds_on_all_samples"].get<bool>());

    // The single-corner construction built from the (K~)_1 corner passes (K)_1 with the same eps.
    const auto xmin = kt.params["x_min"].get<std::size_t>();
    const auto k = condition_K(law, single_corner_spec(2, 1.0, xmin), Sampling{4000, 6});
    CHECK(k.verdict == Verdict::Satisfied);
}

TEST_CASE("(P)_M geometry and examples") {
    const auto lim = pm_limits(10);
    CHECK(lim.Lp == 12.5);
    CHECK(lim.Ltilde == 72000.0);
    for (const auto& g : pm_grid(10)) {
        CHECK(g.Lp <= 12.5);
        CHECK(g.Ltilde <= 72000.0);
    }
    CHECK(pm_grid(10).size() == 9);

    const auto det = polynomial_condition(fixed_law({1, 0, 0, 0}), {1, 0}, 1, {10}, WalkSampling{1000, 500, 1});
    CHECK(det.estimates[0].value == 0.0);
    CHECK(det.verdict == Verdict::Satisfied);

    const auto sym = polynomial_condition(kUniform2, {1, 0}, 2, {16}, WalkSampling{1000000, 400, 2});
    CHECK(sym.estimates[0].value > 0.2);
    CHECK(sym.verdict == Verdict::Violated);
    CHECK_THROWS_AS(polynomial_condition(kUniform2, {1, 0}, 0.5, {16}, WalkSampling{}), ParameterError);
    CHECK_THROWS_AS(polynomial_condition(kUniform2, {1, 0}, 2, {16, 8}, WalkSampling{}), ParameterError);
}

TEST_CASE("slab exits") {
    const auto det = slab_exit(fixed_law({1, 0, 0, 0}), {1, 0}, 1, {4, 8}, WalkSampling{1000, 200, 1});
    for (std::size_t i = 0; i < 2; ++i) CHECK(det.estimates[i].value == 0.0);
    CHECK(det.verdict == Verdict::Satisfied);

    const auto sym = slab_exit(kUniform2, {1, 0}, 1, {4, 8, 16}, WalkSampling{1000000, 3000, 2});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(sym.estimates[i].ciLow <= 0.5);
        CHECK(sym.estimates[i].ciHigh >= 0.5);
    }
    CHECK(sym.verdict != Verdict::Satisfied);

    // X . (1,1) is a +-1 walk stepping up with probability 1 - eps: gambler's ruin oracle.
    const double eps = 0.48;
    const auto ex = slab_exit(law::Expl{2, eps}, {1, 1}, 1, {4, 8, 16}, WalkSampling{1000000, 4000, 3});
    const double rho = eps / (1 - eps);
    const double Ls[] = {4, 8, 16};
    for (std::size_t i = 0; i < 3; ++i) {
        const double a = std::floor(std::sqrt(2.0) * Ls[i]) + 1;
        const double exact = (std::pow(rho, a) - std::pow(rho, 2 * a)) / (1 - std::pow(rho, 2 * a));
        const auto& e = ex.estimates[i];
        const double se = std::sqrt(exact * (1 - exact) / static_cast<double>(e.n));
        CHECK(std::abs(e.value - exact) < 4 * se);
    }
    CHECK(ex.estimate("slope").ciHigh < 0.0);
    CHECK(ex.verdict == Verdict::Satisfied);
    CHECK_THROWS_AS(slab_exit(kUniform2, {1, 0}, 0, {4}, WalkSampling{}), ParameterError);
}

TEST_CASE("tilted box front exits") {
    const Environment det(fixed_law({1, 0, 0, 0}), 1);
    const auto f = tilted_box_exit(det, Site::zero(2), 0.6, 8, {1, 0}, 1000, 100, 1);
    CHECK(f.tally.estimate() == 1.0);

    const Environment sym(kUniform2, 1);
    const auto none = tilted_box_exit(sym, Site::zero(2), 0.6, 8, {1, 0}, 0, 50, 1);
    CHECK(none.tally.censored == 50);
    CHECK(none.tally.resolved() == 0);

    const std::uint64_t runs = 20000;
    const auto est = tilted_box_exit(sym, Site::zero(2), 0.6, 8, {1, 0}, 1000000, runs, 7);
    CHECK(est.tally.estimate() < 1.0);
    // Independent oracle: box (-8^0.6, 8) x (-8^0.6, 8^0.6) written out directly.
    const double side = std::pow(8.0, 0.6);
    std::uint64_t front = 0;
    for (std::uint64_t r = 0; r < runs; ++r) {
        CounterStream u(mix64(r + 0xabcdef));
        std::int64_t x = 0, y = 0;
        while (true) {
            const int e = static_cast<int>(u.uniform() * 4);
            x += e == 0 ? 1 : e == 2 ? -1 : 0;
            y += e == 1 ? 1 : e == 3 ? -1 : 0;
            if (!(x > -side && x < 8 && std::abs(static_cast<double>(y)) < side)) {
                front += x == 8;
                break;
            }
        }
    }
    const double p1 = est.tally.estimate(), p2 = static_cast<double>(front) / runs;
    const double se = std::sqrt(p1 * (1 - p1) / runs + p2 * (1 - p2) / runs);
    CHECK(std::abs(p1 - p2) < 4 * se);
    CHECK_THROWS_AS(tilted_box_exit(sym, Site::zero(2), 1.0, 8, {1, 0}, 10, 1, 1), ParameterError);
}

TEST_CASE("attainability") {
    const auto pol = [] { return std::make_unique<EprimePolicy>(std::vector<double>(4, 0.4), 0.125); };
    AttainParams p;
    p.us = {100, 1000};
    p.eta = 0.5;
    p.replicates = 200;
    const auto r = attainability(kUniform2, pol, p);
    for (const auto& e : r.estimates) CHECK(e.value == 0.0);
    CHECK(r.verdict == Verdict::Satisfied);
    p.us = {1.5};
    CHECK_THROWS_AS(attainability(kUniform2, pol, p), ParameterError);
}

TEST_CASE("report json layout") {
    const auto rep = condition_E0(kUniform2, Sampling{100, 1});
    const auto j = rep.to_json();
    CHECK(j["criterion"] == "E0");
    CHECK(j["verdict"] == "satisfied-empirically");
    REQUIRE(j["estimates"].size() == 4);
    for (const auto& e : j["estimates"])
        for (const char* key : {"name", "value", "ci_low", "ci_high", "n", "censored"}) CHECK(e.contains(key));
    CHECK(json_number(INFINITY) == "inf");
}
