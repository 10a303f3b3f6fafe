#include "rwre/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "rwre/acceptance.hpp"
#include "rwre/config.hpp"
#include "rwre/criteria.hpp"
#include "rwre/discovery.hpp"
#include "rwre/hypercube.hpp"
#include "rwre/io.hpp"
#include "rwre/parallel.hpp"
#include "rwre/regeneration.hpp"
#include "rwre/walk.hpp"

namespace rwre::cli {

using nlohmann::json;

namespace {

// A subcommand parameter: written into config.params when given on the
// command line, defaulted when absent from both the command line and the file.
struct Param {
    std::string name;
    CLI::Option* opt = nullptr;
    std::function<json()> value;
    json fallback;
};

class Params {
public:
    template <class T>
    void add(CLI::App* app, const std::string& name, const std::string& help, json fallback) {
        auto holder = std::make_shared<T>();
        auto* opt = app->add_option("--" + name, *holder, help);
        if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
        list_.push_back({name, opt, [holder] { return json(*holder); }, std::move(fallback)});
    }
    void flag(CLI::App* app, const std::string& name, const std::string& help) {
        auto holder = std::make_shared<bool>(false);
        auto* opt = app->add_flag("--" + name, *holder, help);
        list_.push_back({name, opt, [holder] { return json(*holder); }, false});
    }
    void apply(json& params) const {
        for (const auto& p : list_) {
            if (p.opt->count() > 0)
                params[p.name] = p.value();
            else if (!params.contains(p.name) && !p.fallback.is_null())
                params[p.name] = p.fallback;
        }
    }

private:
    std::vector<Param> list_;
};

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> law;
    std::optional<int> d;
    std::optional<double> eps, tail, kappa, strength;
    std::optional<int> axis;
    std::vector<double> weights;
    std::optional<std::string> ell;
    std::optional<std::string> out;
    bool dump = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config file; flags override its fields");
    app->add_option("--seed", c.seed, "master seed (mandatory here or in the config)");
    app->add_option("--law", c.law, "uniform, uniform_drift, expl, trap_sym, trap_transient, dirichlet, table_mixture");
    app->add_option("--d", c.d, "dimension parameter of the law");
    app->add_option("--eps", c.eps, "expl: eps");
    app->add_option("--tail", c.tail, "trap laws: tail exponent t (0 selects 2^-d)");
    app->add_option("--kappa", c.kappa, "uniform_drift: ellipticity floor");
    app->add_option("--axis", c.axis, "uniform_drift: drift axis (0-based)");
    app->add_option("--strength", c.strength, "uniform_drift: drift strength");
    app->add_option("--weights", c.weights, "dirichlet weights")->delimiter(',');
    app->add_option("--ell", c.ell, "direction: auto or comma-separated components");
    app->add_option("--out", c.out, "output path (prefix or directory); stdout when absent");
    app->add_flag("--dump-config", c.dump, "print the effective config as JSON and exit");
}

ExperimentConfig build_config(const std::string& experiment, const Common& c, const Params& params) {
    ExperimentConfig cfg;
    if (!c.config.empty()) cfg = ExperimentConfig::load(c.config);
    else if (!c.seed) throw ParameterError("a seed is mandatory (--seed or config)");
    cfg.experiment = experiment;
    if (c.seed) cfg.seed = *c.seed;
    if (c.law) cfg.law = json{{"name", *c.law}};
    if (c.d) cfg.law["d"] = *c.d;
    if (c.eps) cfg.law["eps"] = *c.eps;
    if (c.tail) cfg.law["tail"] = *c.tail;
    if (c.kappa) cfg.law["kappa"] = *c.kappa;
    if (c.axis) cfg.law["axis"] = *c.axis;
    if (c.strength) cfg.law["strength"] = *c.strength;
    if (!c.weights.empty()) cfg.law["weights"] = c.weights;
    if (!cfg.law.contains("name")) throw ParameterError("a law is mandatory (--law or config)");
    // Canonical law record: every field spelled out.
    cfg.law = law_to_json(law_from_json(cfg.law));
    if (c.ell) {
        if (*c.ell == "auto") {
            cfg.ell.reset();
        } else {
            RealVec v;
            std::stringstream ss(*c.ell);
            for (std::string tok; std::getline(ss, tok, ',');) {
                try {
                    v.push_back(std::stod(tok));
                } catch (const std::exception&) {
                    throw ParameterError("--ell: cannot parse '" + tok + "'");
                }
            }
            cfg.ell = v;
        }
    }
    if (c.out) cfg.output = *c.out;
    params.apply(cfg.params);
    cfg.direction();  // validates ell against the law
    return cfg;
}

// Artifact sink: a file at output + suffix, or `out` when no output is set.
class Sink {
public:
    Sink(const ExperimentConfig& cfg, const std::string& suffix, std::ostream& fallback) {
        if (cfg.output.empty()) {
            os_ = &fallback;
        } else {
            path_ = cfg.output + suffix;
            file_.open(path_);
            if (!file_) throw ParameterError("cannot write " + path_);
            os_ = &file_;
        }
    }
    std::ostream& operator*() { return *os_; }
    const std::string& path() const { return path_; }

private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
    std::string path_;
};

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

template <class T>
T param(const ExperimentConfig& cfg, const char* name) {
    try {
        return cfg.params.at(name).get<T>();
    } catch (const json::exception&) {
        throw ParameterError(std::string("parameter '") + name + "' is missing or malformed");
    }
}

void positive(std::uint64_t v, const char* name) {
    if (v == 0) throw ParameterError(std::string(name) + " must be positive");
}

int cmd_walk(const ExperimentConfig& cfg, std::ostream& out) {
    const auto law = cfg.site_law();
    const int d = lattice_dim(law);
    const auto steps = param<std::uint64_t>(cfg, "steps");
    const auto walks = param<std::uint64_t>(cfg, "walks");
    positive(steps, "steps");
    positive(walks, "walks");
    const RealVec ell = cfg.direction();

    struct End {
        Site x;
        Trajectory traj;
    };
    const bool keep = param<bool>(cfg, "trajectory");
    const auto ends = parallel_map(walks, [&](std::size_t w) {
        const Environment env(law, replicate_seed(cfg.seed, w));
        End e;
        if (keep && w == 0) {
            e.traj = run(env, Site::zero(d), StopSpec::budget(steps), derive_seed(cfg.seed, w, 0));
            e.x = e.traj.end;
        } else {
            Walker walker(env, Site::zero(d), derive_seed(cfg.seed, w, 0));
            while (walker.steps() < steps) walker.advance();
            e.x = walker.position();
        }
        return e;
    });
    {
        Sink s(cfg, ".csv", out);
        *s << csv_banner(cfg) << '\n' << "walk,steps";
        for (int i = 1; i <= d; ++i) *s << ",x_" << i;
        *s << '\n';
        for (std::size_t w = 0; w < ends.size(); ++w) {
            *s << w << ',' << steps;
            for (int i = 0; i < d; ++i) *s << ',' << ends[w].x[i];
            *s << '\n';
        }
    }
    if (keep) {
        Sink s(cfg, ".trajectory.csv", out);
        *s << csv_banner(cfg) << '\n';
        write_trajectory_csv(*s, ends.front().traj);
    }
    std::vector<double> v;
    for (const auto& e : ends) v.push_back(dot(e.x, ell) / static_cast<double>(steps));
    double mean = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    out << "# walk: mean X_n . ell / n = " << fixed(mean) << " over " << walks << " walks of " << steps << " steps\n";
    return kExitOk;
}

int cmd_regen(const ExperimentConfig& cfg, std::ostream& out) {
    const auto law = cfg.site_law();
    const RealVec ell = cfg.direction();
    auto rp = RegenParams::defaults(ell);
    const double a = param<double>(cfg, "a");
    if (a > 0.0) rp.a = a;
    rp.certifyMargin = param<std::uint64_t>(cfg, "margin");
    rp.validate(param<bool>(cfg, "any-a"));
    const auto steps = param<std::uint64_t>(cfg, "steps");
    const auto walks = param<std::uint64_t>(cfg, "walks");
    positive(steps, "steps");
    positive(walks, "walks");

    const auto res = simulate_regenerations(law, rp, steps, walks, cfg.seed);
    {
        Sink s(cfg, ".csv", out);
        *s << csv_banner(cfg) << '\n';
        write_regenerations_csv(*s, res.records);
    }
    // ell0 for the expl law is (1,..,1); otherwise project on the unit direction.
    RealVec along = ell;
    if (std::holds_alternative<law::Expl>(law)) along.assign(ell.size(), 1.0);
    const auto v = renewal_velocity(res.records, along);
    json rep = {{"renewal", v.along.mean},
                {"renewal_ci", {v.along.ci.lo, v.along.ci.hi}},
                {"direct", v.directAlong.mean},
                {"direct_ci", {v.directAlong.ci.lo, v.directAlong.ci.hi}},
                {"velocity", v.v},
                {"direct_vector", v.direct},
                {"along", along},
                {"intervals", v.intervals},
                {"walks_used", v.walksUsed},
                {"a", rp.a}};
    {
        Sink s(cfg, ".json", out);
        *s << stamped(cfg, rep).dump(2) << '\n';
    }
    out << "# regen: renewal v.ell0 = " << fixed(v.along.mean) << " [" << fixed(v.along.ci.lo) << ", "
        << fixed(v.along.ci.hi) << "], direct " << fixed(v.directAlong.mean) << ", " << v.intervals << " blocks\n";
    return kExitOk;
}

int cmd_hypercube(const ExperimentConfig& cfg, std::ostream& out) {
    const auto law = cfg.site_law();
    const int d = lattice_dim(law);
    const auto reps = param<std::uint64_t>(cfg, "replicates");
    const int moments = param<int>(cfg, "moments");
    positive(reps, "replicates");
    if (moments < 1) throw ParameterError("moments must be at least 1");
    const auto cube = UnitHypercube::at(Site::zero(d));
    const auto rows = parallel_map(reps, [&](std::size_t r) {
        const auto seed = replicate_seed(cfg.seed, r);
        return analyze(Environment(law, seed), cube, moments);
    });
    {
        Sink s(cfg, ".csv", out);
        *s << csv_banner(cfg) << '\n';
        write_analysis_csv_header(*s, d, moments);
        for (std::size_t r = 0; r < rows.size(); ++r) write_analysis_csv_row(*s, replicate_seed(cfg.seed, r), rows[r]);
    }
    double m = 0.0;
    for (const auto& a : rows) m += a.meanExit[0] / static_cast<double>(rows.size());
    out << "# hypercube: mean E_0[T_ex] over " << reps << " environments = " << num(m) << '\n';

    const double alpha = param<double>(cfg, "alpha");
    if (alpha > 0.0) {
        FractionalMomentParams fp;
        fp.alpha = alpha;
        fp.replicates = reps;
        fp.walksPerCorner = param<std::uint64_t>(cfg, "walks-per-corner");
        fp.horizon = param<std::uint64_t>(cfg, "horizon");
        const auto fm = fractional_moment(law, fp, cfg.seed);
        json rep = {{"alpha", alpha},
                    {"exact", fm.exact},
                    {"hill_index", criteria::json_number(fm.verdict.tail.index)},
                    {"hill_ci", {criteria::json_number(fm.verdict.tail.ci.lo), criteria::json_number(fm.verdict.tail.ci.hi)}},
                    {"k", fm.verdict.tail.k},
                    {"n", fm.verdict.n},
                    {"bounded", fm.verdict.bounded},
                    {"censored_walks", fm.censoredWalks},
                    {"verdict", stats::to_string(fm.verdict.verdict)}};
        Sink s(cfg, ".json", out);
        *s << stamped(cfg, rep).dump(2) << '\n';
        out << "# hypercube: (H)_" << num(alpha) << " verdict " << stats::to_string(fm.verdict.verdict) << '\n';
    }
    return kExitOk;
}

criteria::PolicyFactory eprime_factory(const ExperimentConfig& cfg, int d) {
    auto phi = param<std::vector<double>>(cfg, "phi");
    if (phi.empty()) phi.assign(static_cast<std::size_t>(2 * d), 0.4);
    double delta = param<double>(cfg, "delta");
    if (delta == 0.0) delta = 1.0 / (4.0 * d);
    EprimePolicy check(phi, delta);  // validates
    return [phi, delta] { return std::make_unique<EprimePolicy>(phi, delta); };
}

int cmd_criteria(const ExperimentConfig& cfg, std::ostream& out) {
    const auto law = cfg.site_law();
    const int d = lattice_dim(law);
    const auto name = param<std::string>(cfg, "criterion");
    const auto reps = param<std::uint64_t>(cfg, "replicates");
    criteria::CriterionReport rep;
    if (name == "PM" || name == "T") {
        criteria::WalkSampling w{param<std::uint64_t>(cfg, "budget"), reps, cfg.seed};
        const auto Ls = param<std::vector<double>>(cfg, "L");
        if (name == "PM")
            rep = criteria::polynomial_condition(law, cfg.direction(), param<double>(cfg, "M"), Ls, w);
        else
            rep = criteria::slab_exit(law, cfg.direction(), param<double>(cfg, "b"), Ls, w, param<double>(cfg, "gamma"),
                                      param<double>(cfg, "probe-radius"));
    } else if (name == "attain") {
        criteria::AttainParams p;
        p.us = param<std::vector<double>>(cfg, "u");
        p.delta = param<double>(cfg, "attain-delta");
        p.eta = param<double>(cfg, "eta");
        p.alpha = param<double>(cfg, "alpha");
        p.eps = param<double>(cfg, "crit-eps");
        p.replicates = reps;
        p.seed = cfg.seed;
        rep = criteria::attainability(law, eprime_factory(cfg, d), p);
    } else {
        criteria::MomentSpec spec;
        spec.criterion = name;
        spec.exponent = param<double>(cfg, "exponent");
        spec.phi = param<std::vector<double>>(cfg, "phi");
        spec.eps = param<double>(cfg, "crit-eps");
        spec.alpha = param<double>(cfg, "alpha");
        spec.delta = param<double>(cfg, "delta");
        spec.policy = param<std::string>(cfg, "policy");
        spec.corner = param<std::size_t>(cfg, "corner");
        rep = criteria::moment_conditions(law, spec, criteria::Sampling{reps, cfg.seed});
    }
    {
        Sink s(cfg, ".json", out);
        *s << stamped(cfg, rep.to_json()).dump(2) << '\n';
    }
    out << "# criteria: " << rep.criterion << " " << criteria::to_string(rep.verdict) << '\n';
    return kExitOk;
}

int cmd_paths(const ExperimentConfig& cfg, std::ostream& out) {
    const auto law = cfg.site_law();
    const int d = lattice_dim(law);
    const int n = param<int>(cfg, "n");
    const auto reps = param<std::uint64_t>(cfg, "replicates");
    positive(reps, "replicates");
    if (n < 1) throw ParameterError("n must be at least 1");
    const auto factory = eprime_factory(cfg, d);
    const auto bundles = parallel_map(reps, [&](std::size_t r) {
        const Environment env(law, replicate_seed(cfg.seed, r));
        auto pol = factory();
        return paths(env, discover(env, *pol), n);
    });
    std::size_t held = 0, total = 0;
    {
        Sink s(cfg, ".csv", out);
        *s << csv_banner(cfg) << '\n' << "replicate,corner";
        for (int i = 1; i <= d; ++i) *s << ",y1_" << i;
        for (int i = 1; i <= d; ++i) *s << ",yn_" << i;
        *s << ",exit_prob,qtilde,pi,bound,holds\n";
        for (std::size_t r = 0; r < bundles.size(); ++r)
            for (const auto& p : bundles[r].paths) {
                const bool ok = p.pi >= p.bound * (1.0 - 1e-12);
                held += ok;
                ++total;
                *s << r << ',' << p.corner;
                for (int i = 0; i < d; ++i) *s << ',' << p.y1[i];
                for (int i = 0; i < d; ++i) *s << ',' << p.ys.back()[i];
                *s << ',' << num(p.exitProb) << ',' << num(p.qtilde) << ',' << num(p.pi) << ',' << num(p.bound) << ','
                   << (ok ? 1 : 0) << '\n';
            }
    }
    std::size_t geometry = 0;
    for (const auto& b : bundles) geometry += b.disjoint && b.distanceOk;
    out << "# paths: bound held on " << held << "/" << total << " corner paths, geometry ok on " << geometry << "/"
        << bundles.size() << " bundles\n";
    return held == total && geometry == bundles.size() ? kExitOk : kExitFailure;
}

int cmd_acceptance(const Common& c, bool noDeterminism, std::ostream& out) {
    acceptance::Options opts;
    if (c.seed) opts.seed = *c.seed;
    if (c.out) opts.outDir = *c.out;
    opts.determinism = !noDeterminism;
    const auto res = acceptance::run(opts, &out);
    std::size_t passed = 0;
    for (const auto& r : res) passed += r.pass;
    out << "# acceptance: " << passed << "/" << res.size() << " criteria passed\n";
    return passed == res.size() ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"rwre: random walks in i.i.d. random environments on Z^d"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Common common;

    struct Sub {
        CLI::App* app;
        Params params;
    };
    std::map<std::string, Sub> subs;
    auto make = [&](const std::string& name, const std::string& help) -> Sub& {
        auto* a = app.add_subcommand(name, help);
        add_common(a, common);
        auto& s = subs[name];
        s.app = a;
        return s;
    };

    auto& walk = make("walk", "simulate quenched walks and report endpoints");
    walk.params.add<std::uint64_t>(walk.app, "steps", "steps per walk", 10000);
    walk.params.add<std::uint64_t>(walk.app, "walks", "number of walks (one environment each)", 10);
    walk.params.flag(walk.app, "trajectory", "also write the first walk's full trajectory");

    auto& regen = make("regen", "regeneration times and renewal velocity");
    regen.params.add<std::uint64_t>(regen.app, "steps", "steps per walk", 100000);
    regen.params.add<std::uint64_t>(regen.app, "walks", "number of walks", 100);
    regen.params.add<double>(regen.app, "a", "level spacing (0 selects 3 sqrt d)", 0.0);
    regen.params.add<std::uint64_t>(regen.app, "margin", "certification window W (0 selects steps/4)", 0);
    regen.params.flag(regen.app, "any-a", "allow a outside (2 sqrt d, 10 sqrt d)");

    auto& hyper = make("hypercube", "exact analysis of the unit hypercube at the origin");
    hyper.params.add<std::uint64_t>(hyper.app, "replicates", "independent environments", 1);
    hyper.params.add<int>(hyper.app, "moments", "exit-time moments to solve", 1);
    hyper.params.add<double>(hyper.app, "alpha", "(H)_alpha verdict when > 0", 0.0);
    hyper.params.add<std::uint64_t>(hyper.app, "walks-per-corner", "non-integer alpha: walks per corner", 1000);
    hyper.params.add<std::uint64_t>(hyper.app, "horizon", "non-integer alpha: steps per walk", 1000000);

    auto& crit = make("criteria", "empirical criterion reports");
    crit.params.add<std::string>(crit.app, "criterion", "E0, Eprime1, Eprime1-probe, Ktilde1, K, PM, T, attain", "E0");
    crit.params.add<std::uint64_t>(crit.app, "replicates", "environments (one walk each for PM/T)", 10000);
    crit.params.add<std::vector<double>>(crit.app, "phi", "phi per direction (+e_1..+e_d, -e_1..-e_d)", json::array());
    crit.params.add<double>(crit.app, "exponent", "probe exponent (0 selects 1/(4d))", 0.0);
    crit.params.add<double>(crit.app, "alpha", "alpha of (K)_alpha / attainability", 1.0);
    crit.params.add<double>(crit.app, "crit-eps", "eps of (K~)_1, (K)_alpha and attainability", 0.0);
    crit.params.add<double>(crit.app, "delta", "eprime policy threshold (0 selects 1/(4d))", 0.0);
    crit.params.add<std::string>(crit.app, "policy", "K: eprime or single-corner", "eprime");
    crit.params.add<std::size_t>(crit.app, "corner", "single-corner policy: corner mask", 0);
    crit.params.add<double>(crit.app, "M", "(P)_M exponent", 2.0);
    crit.params.add<std::vector<double>>(crit.app, "L", "box scales", json::array({8, 16, 32}));
    crit.params.add<double>(crit.app, "b", "slab depth", 1.0);
    crit.params.add<double>(crit.app, "gamma", "slab fit exponent", 1.0);
    crit.params.add<double>(crit.app, "probe-radius", "slab neighbourhood probe radius", 0.05);
    crit.params.add<std::uint64_t>(crit.app, "budget", "steps per walk", 1000000);
    crit.params.add<std::vector<double>>(crit.app, "u", "attainability grid", json::array({100, 1000, 10000, 100000}));
    crit.params.add<double>(crit.app, "eta", "attainability eta", 0.5);
    crit.params.add<double>(crit.app, "attain-delta", "attainability delta", 0.1);

    auto& pth = make("paths", "escape path bundles out of the eprime hypercube");
    pth.params.add<int>(pth.app, "n", "path length", 5);
    pth.params.add<std::uint64_t>(pth.app, "replicates", "environments", 100);
    pth.params.add<std::vector<double>>(pth.app, "phi", "phi per direction (default 0.4 each)", json::array());
    pth.params.add<double>(pth.app, "delta", "eprime threshold (0 selects 1/(4d))", 0.0);

    bool noDeterminism = false;
    auto* acc = app.add_subcommand("acceptance", "run the acceptance suite");
    acc->add_option("--seed", common.seed, "master seed");
    acc->add_option("--out", common.out, "artifact directory");
    acc->add_flag("--no-determinism", noDeterminism, "skip the rerun of criterion 12");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "rwre: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (acc->parsed()) return cmd_acceptance(common, noDeterminism, out);
        for (auto& [name, sub] : subs) {
            if (!sub.app->parsed()) continue;
            const auto cfg = build_config(name, common, sub.params);
            if (common.dump) {
                out << cfg.to_json().dump(2) << '\n';
                return kExitOk;
            }
            if (name == "walk") return cmd_walk(cfg, out);
            if (name == "regen") return cmd_regen(cfg, out);
            if (name == "hypercube") return cmd_hypercube(cfg, out);
            if (name == "criteria") return cmd_criteria(cfg, out);
            if (name == "paths") return cmd_paths(cfg, out);
        }
        err << "rwre: no subcommand\n";
        return kExitUsage;
    } catch (const ParameterError& e) {
        err << "rwre: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InsufficientData& e) {
        err << "rwre: insufficient data: " << e.what() << '\n';
        return kExitInsufficient;
    } catch (const std::exception& e) {
        err << "rwre: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace rwre::cli
