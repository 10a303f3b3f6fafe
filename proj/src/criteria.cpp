#include "rwre/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rwre/hypercube.hpp"
#include "rwre/io.hpp"
#include "rwre/parallel.hpp"

namespace rwre::criteria {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string dir_name(int e, int d) { return std::string(e < d ? "+e" : "-e") + std::to_string(e % d + 1); }

std::string mask_name(std::size_t m, int d) {
    std::string s = "(";
    for (int i = 0; i < d; ++i) s += std::string(i ? "," : "") + ((m >> i) & 1U ? "1" : "0");
    return s + ")";
}

std::string fmt_L(double L) { return num(L); }

Environment replicate_env(const SiteLaw& law, std::uint64_t seed, std::size_t r) {
    return Environment(law, replicate_seed(seed, r));
}

void check_sampling(const Sampling& s) {
    if (s.replicates < 20) throw ParameterError("criteria: need at least 20 replicates");
}

// Verdict of E[X^a] when X may be infinite with positive probability.
stats::MomentVerdict verdict_with_infinities(const std::vector<double>& xs, double a) {
    const auto inf = std::count_if(xs.begin(), xs.end(), [](double v) { return !std::isfinite(v); });
    if (inf == 0) return stats::moment_verdict(xs, a);
    stats::MomentVerdict mv;
    mv.verdict = stats::TailVerdict::MomentInfinite;
    mv.n = xs.size();
    mv.tail.index = 0.0;
    mv.tail.ci = {0.0, 0.0};
    mv.tail.n = xs.size();
    return mv;
}

Verdict combine(const std::vector<stats::TailVerdict>& vs) {
    bool allFinite = true;
    for (auto v : vs) {
        if (v == stats::TailVerdict::MomentInfinite) return Verdict::Violated;
        if (v != stats::TailVerdict::MomentFinite) allFinite = false;
    }
    return allFinite ? Verdict::Satisfied : Verdict::Inconclusive;
}

std::vector<TransitionVector> origin_vectors(const SiteLaw& law, const Sampling& s) {
    const int d = lattice_dim(law);
    return parallel_map(s.replicates,
                        [&](std::size_t r) { return replicate_env(law, s.seed, r).transitions_at(Site::zero(d)); });
}

double part1_value(const std::vector<double>& phi) {
    const int d = static_cast<int>(phi.size()) / 2;
    double sum = 0.0, sup = 0.0;
    for (double v : phi) sum += v;
    for (int i = 0; i < d; ++i)
        sup = std::max(sup, phi[static_cast<std::size_t>(i)] + phi[static_cast<std::size_t>(i + d)]);
    return 2.0 * sum - sup;
}

void check_phi(const std::vector<double>& phi, int d) {
    if (static_cast<int>(phi.size()) != 2 * d) throw ParameterError("criteria: phi needs 2d entries");
    for (double v : phi)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("criteria: phi entries must be finite and >= 0");
}

Estimate binomial_estimate(const std::string& name, const BinomialTally& t) {
    const auto ci = stats::wilson(t.successes, t.resolved());
    return {name, t.estimate(), ci.lo, ci.hi, t.resolved(), t.censored};
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Satisfied: return "satisfied-empirically";
        case Verdict::Violated: return "violated-empirically";
        default: return "inconclusive";
    }
}

nlohmann::json json_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

const Estimate& CriterionReport::estimate(const std::string& name) const {
    for (const auto& e : estimates)
        if (e.name == name) return e;
    throw ParameterError("report " + criterion + " has no estimate " + name);
}

nlohmann::json CriterionReport::to_json() const {
    nlohmann::json j;
    j["criterion"] = criterion;
    j["params"] = params;
    j["estimates"] = nlohmann::json::array();
    for (const auto& e : estimates)
        j["estimates"].push_back({{"name", e.name},
                                  {"value", json_number(e.value)},
                                  {"ci_low", json_number(e.ciLow)},
                                  {"ci_high", json_number(e.ciHigh)},
                                  {"n", e.n},
                                  {"censored", e.censored}});
    j["verdict"] = to_string(verdict);
    j["notes"] = notes;
    return j;
}

Estimate tail_estimate(const std::string& name, const stats::MomentVerdict& mv) {
    return {name, mv.tail.index, mv.tail.ci.lo, mv.tail.ci.hi, mv.n, 0};
}

CriterionReport condition_E0(const SiteLaw& law, const Sampling& s) {
    check_sampling(s);
    const int d = lattice_dim(law);
    const auto ps = origin_vectors(law, s);
    CriterionReport rep;
    rep.criterion = "E0";
    rep.params = {{"law", law_name(law)}, {"replicates", s.replicates}, {"seed", s.seed}};
    nlohmann::json etas = nlohmann::json::object();
    bool zero = false;
    for (int e = 0; e < 2 * d; ++e) {
        std::vector<double> inv;
        inv.reserve(ps.size());
        for (const auto& p : ps) inv.push_back(p[e] > 0.0 ? 1.0 / p[e] : kInf);
        const auto mv = verdict_with_infinities(inv, 1.0);
        const bool hasZero = std::any_of(inv.begin(), inv.end(), [](double v) { return !std::isfinite(v); });
        zero = zero || hasZero;
        rep.estimates.push_back(tail_estimate("tail_index_inv_p" + dir_name(e, d), mv));
        etas[dir_name(e, d)] = hasZero ? nlohmann::json(0.0) : json_number(mv.bounded ? 1.0 : mv.tail.ci.lo / 2.0);
    }
    rep.params["eta"] = etas;
    if (zero) {
        rep.verdict = Verdict::Violated;
        rep.notes.push_back("p(0,e) = 0 occurs on the sample");
    } else {
        rep.verdict = Verdict::Satisfied;
        rep.notes.push_back("eta_e is half the lower Hill bound (1 for bounded samples)");
    }
    return rep;
}

CriterionReport condition_Eprime_probe(const SiteLaw& law, double exponent, const Sampling& s) {
    check_sampling(s);
    const int d = lattice_dim(law);
    if (exponent == 0.0) exponent = 1.0 / (4.0 * d);
    if (!(exponent > 0.0)) throw ParameterError("Eprime probe: exponent must be positive");
    const auto ps = origin_vectors(law, s);
    CriterionReport rep;
    rep.criterion = "Eprime1-probe";
    rep.params = {{"law", law_name(law)}, {"exponent", exponent}, {"replicates", s.replicates}, {"seed", s.seed}};
    bool allInfinite = true;
    nlohmann::json per = nlohmann::json::object();
    for (int e = 0; e < 2 * d; ++e) {
        std::vector<double> inv;
        for (const auto& p : ps) inv.push_back(p[e] > 0.0 ? 1.0 / p[e] : kInf);
        const auto mv = verdict_with_infinities(inv, exponent);
        per[dir_name(e, d)] = stats::to_string(mv.verdict);
        rep.estimates.push_back(tail_estimate("tail_index_inv_p" + dir_name(e, d), mv));
        if (mv.verdict != stats::TailVerdict::MomentInfinite) allInfinite = false;
    }
    rep.params["direction_verdicts"] = per;
    rep.params["moment_verdict"] =
        stats::to_string(allInfinite ? stats::TailVerdict::MomentInfinite : stats::TailVerdict::Inconclusive);
    if (allInfinite) {
        rep.verdict = Verdict::Violated;
        rep.notes.push_back("every direction has an infinite moment at the probe exponent; any admissible phi puts at "
                            "least this exponent on some direction");
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.notes.push_back("the probe can only refute; supply phi for a full check");
    }
    return rep;
}

CriterionReport condition_Eprime(const SiteLaw& law, const std::vector<double>& phi, const Sampling& s) {
    check_sampling(s);
    const int d = lattice_dim(law);
    check_phi(phi, d);
    const auto ps = origin_vectors(law, s);
    CriterionReport rep;
    rep.criterion = "Eprime1";
    rep.params = {{"law", law_name(law)}, {"phi", phi}, {"replicates", s.replicates}, {"seed", s.seed}};
    const double p1 = part1_value(phi);
    rep.estimates.push_back({"part1", p1, p1, p1, 0, 0});
    std::vector<stats::TailVerdict> vs;
    for (int e = 0; e < 2 * d; ++e) {
        std::vector<double> prod;
        prod.reserve(ps.size());
        for (const auto& p : ps) {
            double v = 1.0;
            for (int f = 0; f < 2 * d; ++f) {
                const double ph = phi[static_cast<std::size_t>(f)];
                if (f == e || ph == 0.0) continue;
                v *= p[f] > 0.0 ? std::pow(p[f], -ph) : kInf;
            }
            prod.push_back(v);
        }
        const auto mv = verdict_with_infinities(prod, 1.0);
        vs.push_back(mv.verdict);
        rep.estimates.push_back(tail_estimate("tail_index_part2" + dir_name(e, d), mv));
    }
    if (!(p1 > 1.0)) {
        rep.verdict = Verdict::Violated;
        rep.notes.push_back("2 sum phi - max(phi(e) + phi(-e)) <= 1");
    } else {
        rep.verdict = combine(vs);
    }
    return rep;
}

CriterionReport condition_Ktilde(const SiteLaw& law, double eps, const Sampling& s) {
    check_sampling(s);
    if (!(eps > 0.0)) throw ParameterError("Ktilde: eps must be positive");
    const int d = lattice_dim(law);
    const UnitHypercube cube = UnitHypercube::at(Site::zero(d));
    const std::size_t nc = cube.size();

    auto qs = parallel_map(s.replicates, [&](std::size_t r) {
        const auto env = replicate_env(law, s.seed, r);
        std::vector<double> q(nc, 0.0);
        for (std::size_t m = 0; m < nc; ++m) {
            const auto p = env.transitions_at(cube.corner(m));
            for (int e : cube.exterior_directions(m)) q[m] = std::max(q[m], p[e]);
        }
        return q;
    });

    CriterionReport rep;
    rep.criterion = "Ktilde1";
    const double expo = 1.0 + eps;
    rep.params = {{"law", law_name(law)}, {"eps", eps}, {"exponent", expo}, {"replicates", s.replicates},
                  {"seed", s.seed}};
    bool anyFinite = false, allInfinite = true;
    std::size_t best = nc;
    double bestMean = kInf;
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t m = 0; m < nc; ++m) {
        std::vector<double> inv;
        inv.reserve(qs.size());
        for (const auto& q : qs) inv.push_back(q[m] > 0.0 ? 1.0 / q[m] : kInf);
        const auto mv = verdict_with_infinities(inv, expo);
        per[mask_name(m, d)] = stats::to_string(mv.verdict);
        rep.estimates.push_back(tail_estimate("tail_index_inv_Q" + mask_name(m, d), mv));
        if (mv.verdict == stats::TailVerdict::MomentFinite) {
            anyFinite = true;
            double mean = 0.0;
            for (double v : inv) mean += std::pow(v, expo);
            mean /= static_cast<double>(inv.size());
            if (mean < bestMean) bestMean = mean, best = m;
        }
        if (mv.verdict != stats::TailVerdict::MomentInfinite) allInfinite = false;
    }
    rep.params["corner_verdicts"] = per;
    if (best < nc) {
        rep.params["x_min"] = best;
        rep.estimates.push_back({"mean_inv_Q_pow" + mask_name(best, d), bestMean, bestMean, bestMean, qs.size(), 0});
    }
    rep.verdict = anyFinite ? Verdict::Satisfied : allInfinite ? Verdict::Violated : Verdict::Inconclusive;

    if (const auto* ex = std::get_if<law::Expl>(&law)) {
        const double bound = ex->eps / d;
        double minQ = kInf;
        for (const auto& q : qs)
            for (double v : q) minQ = std::min(minQ, v);
        const double ratio = minQ / bound;
        rep.estimates.push_back({"min_Q_over_eps_div_d", ratio, ratio, ratio, qs.size() * nc, 0});
        const bool holds = ratio >= 1.0 - 1e-12;
        rep.params["lower_bound_holds_on_all_samples"] = holds;
        if (!holds) {
            rep.notes.push_back("Q_x >= eps/d fails on a sample");
            rep.verdict = Verdict::Inconclusive;
        } else {
            rep.notes.push_back("Q_x >= eps/d holds on all " + std::to_string(qs.size()) + " samples");
        }
    }
    return rep;
}

KSpec eprime_spec(int d, const std::vector<double>& phi, double alpha, double delta, double eps) {
    check_phi(phi, d);
    if (!(alpha > 0.0)) throw ParameterError("K: alpha must be positive");
    if (delta == 0.0) delta = 1.0 / (4.0 * d);
    if (eps <= 0.0) eps = part1_value(phi) - alpha;
    if (!(eps > 0.0)) throw ParameterError("K: phi leaves no room for a positive eps");
    KSpec k;
    k.alpha = alpha;
    k.eps = eps;
    k.gammas = gammas_from_phi(UnitHypercube::at(Site::zero(d)), phi);
    k.policy = [phi, delta] { return std::make_unique<EprimePolicy>(phi, delta); };
    k.policyName = "eprime";
    return k;
}

KSpec single_corner_spec(int d, double eps, std::size_t cornerMask) {
    if (!(eps > 0.0)) throw ParameterError("K: eps must be positive");
    const auto base = UnitHypercube::at(Site::zero(d));
    if (cornerMask >= base.size()) throw ParameterError("K: corner out of range");
    const Site x = base.corner(cornerMask);
    std::vector<double> marks(base.size(), 0.0);
    marks[cornerMask] = 1.0 + eps;
    KSpec k;
    k.alpha = 1.0;
    k.eps = eps;
    k.gammas = marks;
    const auto cube = UnitHypercube::at(-x);
    k.policy = [cube, marks] { return std::make_unique<FixedPolicy>(cube, marks); };
    k.policyName = "single-corner";
    return k;
}

CriterionReport condition_K(const SiteLaw& law, const KSpec& spec, const Sampling& s) {
    check_sampling(s);
    if (!(spec.alpha > 0.0) || !(spec.eps > 0.0)) throw ParameterError("K: alpha and eps must be positive");
    if (!spec.policy) throw ParameterError("K: missing discovery policy");
    const int d = lattice_dim(law);
    const UnitHypercube cube = UnitHypercube::at(Site::zero(d));
    const std::size_t nc = cube.size();
    if (spec.gammas.size() != nc) throw ParameterError("K: need one gamma per corner");

    struct Sample {
        std::vector<double> invQ;
        double V = 0.0;
        double markSum = 0.0;
        int event = 0;
    };
    auto samples = parallel_map(s.replicates, [&](std::size_t r) {
        const auto env = replicate_env(law, s.seed, r);
        Sample out;
        out.invQ.assign(nc, 0.0);
        for (std::size_t m = 0; m < nc; ++m) {
            const auto p = env.transitions_at(cube.corner(m));
            double q = 0.0;
            for (int e : cube.exterior_directions(m)) q = std::max(q, p[e]);
            out.invQ[m] = q > 0.0 ? 1.0 / q : kInf;
        }
        auto policy = spec.policy();
        const auto mmh = discover(env, *policy);
        out.event = mmh.event;
        out.markSum = mark_sum(mmh, spec.gammas);
        double V = 1.0;
        try {
            const auto a = analyze(QuenchedHypercube::build(env, mmh.h));
            const auto s0 = static_cast<Eigen::Index>(mmh.h.mask_of(Site::zero(d)));
            for (std::size_t m = 0; m < nc; ++m) {
                if (mmh.marks[m] == 0.0) continue;
                const double qt = a.Qtilde(s0, static_cast<Eigen::Index>(m));
                V *= qt > 0.0 ? std::pow(qt, -mmh.marks[m]) : kInf;
            }
        } catch (const DegenerateEnvironment&) {
            V = kInf;
        }
        out.V = V;
        return out;
    });

    CriterionReport rep;
    rep.criterion = "K";
    rep.params = {{"law", law_name(law)}, {"alpha", spec.alpha}, {"eps", spec.eps}, {"gamma", spec.gammas},
                  {"policy", spec.policyName}, {"replicates", s.replicates}, {"seed", s.seed}};

    std::vector<stats::TailVerdict> vs;
    for (std::size_t m = 0; m < nc; ++m) {
        if (spec.gammas[m] == 0.0) continue;
        std::vector<double> inv;
        for (const auto& sm : samples) inv.push_back(sm.invQ[m]);
        const auto mv = verdict_with_infinities(inv, spec.gammas[m]);
        vs.push_back(mv.verdict);
        rep.estimates.push_back(tail_estimate("part1_tail_index_inv_Q" + mask_name(m, d), mv));
    }
    std::vector<double> V;
    for (const auto& sm : samples) V.push_back(sm.V);
    const auto mv = verdict_with_infinities(V, 1.0);
    vs.push_back(mv.verdict);
    rep.estimates.push_back(tail_estimate("part2_tail_index_V", mv));

    const double need = spec.alpha + spec.eps;
    std::size_t holds = 0;
    double minSum = kInf;
    for (const auto& sm : samples) {
        minSum = std::min(minSum, sm.markSum);
        if (sm.markSum >= need * (1.0 - 1e-12)) ++holds;
    }
    rep.estimates.push_back({"part3_min_mark_sum", minSum, minSum, minSum, samples.size(), 0});
    rep.params["part3_threshold"] = need;
    rep.params["part3_holds_on"] = std::to_string(holds) + "/" + std::to_string(samples.size());
    rep.notes.push_back("part 3 is checked on the sampled environments only");

    if (spec.policyName == "eprime") {
        nlohmann::json events = nlohmann::json::object();
        for (const auto& sm : samples) {
            const auto key = "A" + std::to_string(sm.event);
            events[key] = events.value(key, 0) + 1;
        }
        rep.params["events"] = events;
    }

    rep.verdict = holds < samples.size() ? Verdict::Violated : combine(vs);
    return rep;
}

CriterionReport moment_conditions(const SiteLaw& law, const MomentSpec& spec, const Sampling& s) {
    const int d = lattice_dim(law);
    if (spec.criterion == "E0") return condition_E0(law, s);
    if (spec.criterion == "Eprime1-probe") return condition_Eprime_probe(law, spec.exponent, s);
    if (spec.criterion == "Eprime1") {
        if (spec.phi.empty()) throw ParameterError("Eprime1: phi is required");
        return condition_Eprime(law, spec.phi, s);
    }
    if (spec.criterion == "Ktilde1") return condition_Ktilde(law, spec.eps, s);
    if (spec.criterion == "K") {
        if (spec.policy == "eprime") {
            if (spec.phi.empty()) throw ParameterError("K: phi is required for the eprime policy");
            return condition_K(law, eprime_spec(d, spec.phi, spec.alpha, spec.delta, spec.eps), s);
        }
        if (spec.policy == "single-corner") return condition_K(law, single_corner_spec(d, spec.eps, spec.corner), s);
        throw ParameterError("K: unknown policy " + spec.policy);
    }
    throw ParameterError("unknown criterion " + spec.criterion);
}

BoxGrid pm_limits(double L) { return {1.25 * L, 72.0 * L * L * L}; }

std::vector<BoxGrid> pm_grid(double L) {
    if (!(L > 0.0)) throw ParameterError("pm grid: L must be positive");
    const auto lim = pm_limits(L);
    std::vector<BoxGrid> g;
    for (double lp : {L, 1.125 * L, 1.25 * L})
        for (double lt : {L, 4.0 * L, 16.0 * L})
            if (lp <= lim.Lp && lt <= lim.Ltilde) g.push_back({lp, lt});
    return g;
}

namespace {

void check_Ls(const std::vector<double>& Ls) {
    if (Ls.empty()) throw ParameterError("criteria: empty L grid");
    for (std::size_t i = 0; i < Ls.size(); ++i) {
        if (!(Ls[i] > 0.0)) throw ParameterError("criteria: L values must be positive");
        if (i && !(Ls[i] > Ls[i - 1])) throw ParameterError("criteria: L grid must be ascending");
    }
}

RealVec unit(RealVec v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (!(n > 0.0)) throw ParameterError("criteria: ell must be nonzero");
    for (double& x : v) x /= n;
    return v;
}

// One annealed walk per replicate until it leaves `inside`; success when `bad` holds at the exit site.
template <class Inside, class Bad>
BinomialTally annealed_exit(const SiteLaw& law, const WalkSampling& w, Inside inside, Bad bad) {
    const int d = lattice_dim(law);
    struct Outcome {
        int kind = 0;  // 0 censored, 1 success, 2 failure
    };
    const auto res = parallel_map(w.replicates, [&](std::size_t r) {
        const auto env = replicate_env(law, w.seed, r);
        Walker walker(env, Site::zero(d), derive_seed(w.seed, r, 0));
        Outcome o;
        while (walker.steps() < w.walkBudget) {
            walker.advance();
            if (!inside(walker.position())) {
                o.kind = bad(walker.position()) ? 1 : 2;
                break;
            }
        }
        return o;
    });
    BinomialTally t;
    for (const auto& o : res) {
        if (o.kind == 1) ++t.successes;
        else if (o.kind == 2) ++t.failures;
        else ++t.censored;
    }
    return t;
}

struct SlabFit {
    std::vector<BinomialTally> tallies;
    bool fitted = false;
    stats::LineFit fit;
    std::size_t points = 0;
};

SlabFit fit_slab(const SiteLaw& law, const RealVec& ell, double b, const std::vector<double>& Ls,
                 const WalkSampling& w, double gamma) {
    SlabFit out;
    std::vector<double> xs, ys, ws;
    for (double L : Ls) {
        const Slab slab(ell, b, L);
        const auto t = annealed_exit(
            law, w, [&](const Site& y) { return slab.contains(y); }, [&](const Site& y) { return dot(y, ell) < 0.0; });
        out.tallies.push_back(t);
        if (t.successes > 0) {
            const double p = t.estimate();
            const double n = static_cast<double>(t.resolved());
            const double var = std::max((1.0 - p) / static_cast<double>(t.successes), 1.0 / (n * n));
            xs.push_back(std::pow(L, gamma));
            ys.push_back(std::log(p));
            ws.push_back(1.0 / var);
        }
    }
    out.points = xs.size();
    if (xs.size() >= 2) {
        out.fit = stats::weighted_line_fit(xs, ys, ws);
        out.fitted = true;
    }
    return out;
}

Verdict slab_verdict(const SlabFit& f) {
    const bool allZero = std::all_of(f.tallies.begin(), f.tallies.end(),
                                     [](const BinomialTally& t) { return t.successes == 0 && t.resolved() > 0; });
    if (allZero) return Verdict::Satisfied;
    if (!f.fitted) return Verdict::Inconclusive;
    if (f.fit.slopeCi.hi < 0.0) return Verdict::Satisfied;
    if (f.fit.slopeCi.lo > 0.0) return Verdict::Violated;
    return Verdict::Inconclusive;
}

}  // namespace

CriterionReport polynomial_condition(const SiteLaw& law, const RealVec& ellIn, double M, const std::vector<double>& Ls,
                                     const WalkSampling& w) {
    if (!(M >= 1.0)) throw ParameterError("PM: M must be at least 1");
    check_Ls(Ls);
    const int d = lattice_dim(law);
    if (static_cast<int>(ellIn.size()) != d) throw ParameterError("PM: ell has the wrong dimension");
    const RealVec ell = unit(ellIn);

    CriterionReport rep;
    rep.criterion = "PM";
    rep.params = {{"law", law_name(law)}, {"ell", ell}, {"M", M}, {"L", Ls}, {"walk_budget", w.walkBudget},
                  {"replicates", w.replicates}, {"seed", w.seed},
                  {"grid", "L' in {L, 9L/8, 5L/4}, L~ in {L, 4L, 16L} capped by 72 L^3"}};
    nlohmann::json chosen = nlohmann::json::array();
    Verdict v = Verdict::Inconclusive;
    for (double L : Ls) {
        BinomialTally best;
        BoxGrid bestBox;
        bool first = true;
        for (const auto& g : pm_grid(L)) {
            const SlabBox box(ell, L, g.Lp, g.Ltilde);
            const auto t = annealed_exit(
                law, w, [&](const Site& y) { return box.contains(y); }, [&](const Site& y) { return dot(y, ell) < L; });
            if (first || t.estimate() < best.estimate()) best = t, bestBox = g, first = false;
        }
        auto e = binomial_estimate("P[L=" + fmt_L(L) + "]", best);
        rep.estimates.push_back(e);
        const double thr = std::pow(L, -M);
        chosen.push_back({{"L", L}, {"Lp", bestBox.Lp}, {"Ltilde", bestBox.Ltilde}, {"threshold", thr}});
        if (best.resolved() == 0) v = Verdict::Inconclusive;
        else if (e.ciHigh <= thr) v = Verdict::Satisfied;
        else if (e.ciLow > thr) v = Verdict::Violated;
        else v = Verdict::Inconclusive;
    }
    rep.params["chosen_boxes"] = chosen;
    rep.verdict = v;
    rep.notes.push_back("verdict at the largest L; the criterion's threshold scale (2/3) 3^(29d) is out of reach, "
                        "only the decay against L^-M is examined");
    return rep;
}

CriterionReport slab_exit(const SiteLaw& law, const RealVec& ellIn, double b, const std::vector<double>& Ls,
                          const WalkSampling& w, double gamma, double probeRadius) {
    if (!(b > 0.0)) throw ParameterError("slab: b must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("slab: gamma must lie in (0, 1]");
    if (!(probeRadius >= 0.0)) throw ParameterError("slab: probe radius must be >= 0");
    check_Ls(Ls);
    const int d = lattice_dim(law);
    if (static_cast<int>(ellIn.size()) != d) throw ParameterError("slab: ell has the wrong dimension");
    const RealVec ell = unit(ellIn);

    CriterionReport rep;
    rep.criterion = "T_gamma";
    rep.params = {{"law", law_name(law)}, {"ell", ell}, {"b", b}, {"gamma", gamma}, {"L", Ls},
                  {"walk_budget", w.walkBudget}, {"replicates", w.replicates}, {"seed", w.seed},
                  {"probe_radius", probeRadius}};
    const auto f = fit_slab(law, ell, b, Ls, w, gamma);
    for (std::size_t i = 0; i < Ls.size(); ++i)
        rep.estimates.push_back(binomial_estimate("P[L=" + fmt_L(Ls[i]) + "]", f.tallies[i]));
    if (f.fitted) {
        rep.estimates.push_back({"slope", f.fit.slope, f.fit.slopeCi.lo, f.fit.slopeCi.hi, f.points, 0});
        rep.estimates.push_back({"intercept", f.fit.intercept, f.fit.intercept, f.fit.intercept, f.points, 0});
        rep.params["r_squared"] = f.fit.rSquared;
    } else {
        rep.notes.push_back("fewer than two scales with a backtrack exit; no fit");
    }
    rep.verdict = slab_verdict(f);

    if (probeRadius > 0.0) {
        for (int i = 0; i < d; ++i)
            for (int sgn : {1, -1}) {
                RealVec l2 = ell;
                l2[static_cast<std::size_t>(i)] += sgn * probeRadius;
                l2 = unit(l2);
                const auto g = fit_slab(law, l2, b, Ls, w, gamma);
                const auto name = "probe_slope" + dir_name(sgn > 0 ? i : i + d, d);
                if (g.fitted) rep.estimates.push_back({name, g.fit.slope, g.fit.slopeCi.lo, g.fit.slopeCi.hi, g.points, 0});
                const auto pv = slab_verdict(g);
                if (pv != Verdict::Satisfied && rep.verdict == Verdict::Satisfied) rep.verdict = pv == Verdict::Violated ? pv : Verdict::Inconclusive;
                if (pv == Verdict::Violated) rep.verdict = Verdict::Violated;
            }
        rep.notes.push_back("neighbourhood probed at ell +- radius e_i");
    } else {
        rep.notes.push_back("neighbourhood of ell not probed");
    }
    return rep;
}

CriterionReport attainability(const SiteLaw& law, const PolicyFactory& policy, const AttainParams& p) {
    if (p.us.empty()) throw ParameterError("attainability: empty u grid");
    if (!(p.delta > 0.0) || !(p.eta > 0.0) || !(p.alpha > 0.0) || !(p.eps > 0.0))
        throw ParameterError("attainability: delta, eta, alpha, eps must be positive");
    if (p.replicates < 1) throw ParameterError("attainability: need replicates");
    if (!policy) throw ParameterError("attainability: missing policy");
    std::vector<int> ns;
    for (double u : p.us) {
        const double n = std::floor(p.eta * std::log(u));
        if (!(u > 1.0) || n < 1.0) throw ParameterError("attainability: floor(eta log u) must be at least 1");
        ns.push_back(static_cast<int>(n));
    }
    const int nMax = *std::max_element(ns.begin(), ns.end());

    // Per replicate: max_x pi_x^(n) for n = 1..nMax.
    const auto maxPis = parallel_map(p.replicates, [&](std::size_t r) {
        const auto env = replicate_env(law, p.seed, r);
        auto pol = policy();
        const auto mmh = discover(env, *pol);
        std::vector<double> best(static_cast<std::size_t>(nMax), 0.0);
        try {
            const auto bundle = paths(env, mmh, nMax);
            for (const auto& bp : bundle.paths) {
                double pi = bp.exitProb;
                for (int n = 1; n <= nMax; ++n) {
                    if (n > 1) pi *= bp.Q[static_cast<std::size_t>(n - 2)];
                    best[static_cast<std::size_t>(n - 1)] = std::max(best[static_cast<std::size_t>(n - 1)], pi);
                }
            }
        } catch (const DegenerateEnvironment&) {
        }
        return best;
    });

    CriterionReport rep;
    rep.criterion = "attainability";
    rep.params = {{"law", law_name(law)}, {"u", p.us}, {"delta", p.delta}, {"eta", p.eta}, {"alpha", p.alpha},
                  {"eps", p.eps}, {"replicates", p.replicates}, {"seed", p.seed}};
    bool allPass = true, anyFail = false;
    nlohmann::json bench = nlohmann::json::array();
    for (std::size_t i = 0; i < p.us.size(); ++i) {
        const double u = p.us[i];
        const double thr = std::pow(u, -(p.alpha + 2.0 * p.delta) / (p.alpha + p.eps));
        const double benchmark = std::pow(u, -(p.alpha + p.delta));
        BinomialTally t;
        for (const auto& mp : maxPis) (mp[static_cast<std::size_t>(ns[i] - 1)] < thr ? t.successes : t.failures)++;
        auto e = binomial_estimate("freq[u=" + num(u) + "]", t);
        rep.estimates.push_back(e);
        bench.push_back({{"u", u}, {"n", ns[i]}, {"threshold", thr}, {"benchmark", benchmark},
                         {"below_benchmark", e.value <= benchmark}});
        if (e.value > benchmark) allPass = false;
        if (e.ciLow > benchmark) anyFail = true;
    }
    rep.params["grid"] = bench;
    rep.verdict = allPass ? Verdict::Satisfied : anyFail ? Verdict::Violated : Verdict::Inconclusive;
    return rep;
}

TiltedExit tilted_box_exit(const Environment& env, const Site& center, double beta, double L, const RealVec& vhat,
                           std::uint64_t walkBudget, std::uint64_t runs, std::uint64_t seed) {
    if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("tilted box: beta must lie in (0, 1)");
    if (!(L >= 2.0) || L != std::floor(L)) throw ParameterError("tilted box: L must be an integer >= 2");
    const TiltedBox box(center, beta, L, vhat);
    const auto res = parallel_map(runs, [&](std::size_t r) {
        Walker w(env, center, derive_seed(seed, 3, r));
        while (w.steps() < walkBudget) {
            w.advance();
            if (!box.contains(w.position())) return box.is_front_exit(w.position()) ? 1 : 2;
        }
        return 0;
    });
    TiltedExit out;
    for (int k : res) {
        if (k == 1) ++out.tally.successes;
        else if (k == 2) ++out.tally.failures;
        else ++out.tally.censored;
    }
    out.ci = stats::wilson(out.tally.successes, out.tally.resolved());
    return out;
}

}  // namespace rwre::criteria
