#include "rwre/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rwre/io.hpp"

namespace rwre {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class T>
T field(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParameterError(std::string("config: malformed field '") + key + "'");
    }
}

}  // namespace

nlohmann::json law_to_json(const SiteLaw& law) {
    return std::visit(
        overloaded{
            [](const law::UniformDrift& l) -> nlohmann::json {
                return {{"name", "uniform_drift"}, {"d", l.d}, {"kappa", l.kappa}, {"axis", l.axis},
                        {"strength", l.strength}};
            },
            [](const law::Expl& l) -> nlohmann::json { return {{"name", "expl"}, {"d", l.d}, {"eps", l.eps}}; },
            [](const law::TrapSym& l) -> nlohmann::json { return {{"name", "trap_sym"}, {"d", l.d}, {"tail", l.tail}}; },
            [](const law::TrapTransient& l) -> nlohmann::json {
                return {{"name", "trap_transient"}, {"d", l.d}, {"tail", l.tail}};
            },
            [](const law::Dirichlet& l) -> nlohmann::json { return {{"name", "dirichlet"}, {"weights", l.weights}}; },
            [](const law::TableMixture& l) -> nlohmann::json {
                nlohmann::json vs = nlohmann::json::array();
                for (const auto& v : l.vectors) {
                    std::vector<double> row;
                    for (int e = 0; e < v.size(); ++e) row.push_back(v[e]);
                    vs.push_back(row);
                }
                return {{"name", "table_mixture"}, {"weights", l.weights}, {"vectors", vs}};
            },
        },
        law);
}

SiteLaw law_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("name")) throw ParameterError("config: law needs a name");
    const auto name = field<std::string>(j, "name", "");
    const int d = field<int>(j, "d", 2);
    SiteLaw law;
    if (name == "uniform") {
        law = law::UniformDrift{d, 1.0 / (2.0 * d), 0, 0.0};
    } else if (name == "uniform_drift") {
        law = law::UniformDrift{d, field<double>(j, "kappa", 1.0 / (2.0 * d)), field<int>(j, "axis", 0),
                                field<double>(j, "strength", 0.0)};
    } else if (name == "expl") {
        law = law::Expl{d, field<double>(j, "eps", 0.2)};
    } else if (name == "trap_sym") {
        law = law::TrapSym{d, field<double>(j, "tail", 0.0)};
    } else if (name == "trap_transient") {
        law = law::TrapTransient{field<int>(j, "d", 1), field<double>(j, "tail", 0.0)};
    } else if (name == "dirichlet") {
        auto w = field<std::vector<double>>(j, "weights", {});
        if (w.empty()) w.assign(static_cast<std::size_t>(2 * d), 1.0);
        law = law::Dirichlet{w};
    } else if (name == "table_mixture" || name == "table") {
        law::TableMixture t;
        t.weights = field<std::vector<double>>(j, "weights", {});
        for (const auto& row : field<std::vector<std::vector<double>>>(j, "vectors", {})) {
            if (row.size() % 2 != 0 || row.empty()) throw ParameterError("config: table vectors need 2d entries");
            t.vectors.emplace_back(static_cast<int>(row.size() / 2), row.data());
        }
        law = t;
    } else {
        throw ParameterError("config: unknown law '" + name + "'");
    }
    validate(law);
    return law;
}

RealVec default_direction(const SiteLaw& law) {
    const int d = lattice_dim(law);
    RealVec ell(static_cast<std::size_t>(d), 0.0);
    if (std::holds_alternative<law::Expl>(law)) {
        for (double& x : ell) x = 1.0 / std::sqrt(static_cast<double>(d));
    } else if (const auto* u = std::get_if<law::UniformDrift>(&law)) {
        ell[static_cast<std::size_t>(u->axis)] = 1.0;
    } else if (std::holds_alternative<law::TrapTransient>(law)) {
        ell.back() = 1.0;
    } else {
        ell[0] = 1.0;
    }
    return ell;
}

RealVec ExperimentConfig::direction() const {
    const auto law = site_law();
    if (!ell) return default_direction(law);
    if (static_cast<int>(ell->size()) != lattice_dim(law)) throw ParameterError("config: ell has the wrong dimension");
    RealVec v = *ell;
    double n = 0.0;
    for (double x : v) n += x * x;
    if (!(n > 0.0)) throw ParameterError("config: ell must be nonzero");
    for (double& x : v) x /= std::sqrt(n);
    return v;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["law"] = law;
    j["ell"] = ell ? nlohmann::json(*ell) : nlohmann::json("auto");
    j["seed"] = seed;
    j["params"] = params;
    j["output"] = output;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParameterError("config: top level must be an object");
    if (!j.contains("seed")) throw ParameterError("config: seed is mandatory");
    ExperimentConfig c;
    c.experiment = field<std::string>(j, "experiment", "");
    c.law = j.value("law", nlohmann::json::object());
    if (j.contains("ell") && !(j["ell"].is_string() && j["ell"] == "auto")) c.ell = field<RealVec>(j, "ell", {});
    c.seed = field<std::uint64_t>(j, "seed", 0);
    c.params = j.value("params", nlohmann::json::object());
    if (!c.params.is_object()) throw ParameterError("config: params must be an object");
    c.output = field<std::string>(j, "output", "");
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("config: " + path + ": " + e.what());
    }
    return from_json(j);
}

std::string ExperimentConfig::hash() const {
    auto j = to_json();
    j.erase("output");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string csv_banner(const ExperimentConfig& cfg) {
    return std::string("# ") + kToolVersion + " schema=" + std::to_string(kCsvSchemaVersion) + " config=" + cfg.hash();
}

nlohmann::json stamped(const ExperimentConfig& cfg, nlohmann::json body) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["config_hash"] = cfg.hash();
    j["config"] = cfg.to_json();
    j["result"] = std::move(body);
    return j;
}

}  // namespace rwre
