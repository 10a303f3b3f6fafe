#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rwre/cli.hpp"
#include "rwre/io.hpp"

using namespace rwre;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("rwre_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("regen example reports velocity near 0.6") {
    const auto dir = scratch("regen");
    const auto prefix = (dir / "expl").string();
    const auto r = invoke({"regen", "--law", "expl", "--d", "2", "--eps", "0.2", "--ell", "auto", "--steps", "100000",
                        "--walks", "100", "--seed", "42", "--out", prefix});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# regen:", 0) == 0);
    const auto j = nlohmann::json::parse(slurp(prefix + ".json"));
    const double v = j.at("result").at("renewal").get<double>();
    CHECK(v >= 0.59);
    CHECK(v <= 0.61);
    const auto csv = slurp(prefix + ".csv");
    CHECK(csv.rfind(std::string("# ") + kToolVersion + " schema=1 config=" + j.at("config_hash").get<std::string>(), 0) == 0);
    CHECK(csv.find("walk,k,tau,x_1,x_2,censored") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("hypercube example gives a meanExit = 2 row") {
    const auto r = invoke({"hypercube", "--law", "uniform", "--d", "2", "--replicates", "1", "--moments", "2", "--seed", "1"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string banner, header, row;
    std::getline(in, banner);
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header.find("meanExit_0") != std::string::npos);
    CHECK(row.find(",2,2,1.9999999999999998,1.9999999999999998,6,6,") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(invoke({"walk", "--law", "uniform", "--bogus", "--seed", "1"}).code == cli::kExitUsage);
    CHECK(invoke({}).code == cli::kExitUsage);
    CHECK(invoke({"frobnicate"}).code == cli::kExitUsage);
    const auto noSeed = invoke({"walk", "--law", "uniform"});
    CHECK(noSeed.code == cli::kExitUsage);
    CHECK(noSeed.err.find("seed") != std::string::npos);
    CHECK(invoke({"walk", "--law", "expl", "--d", "2", "--eps", "0.9", "--seed", "1"}).code == cli::kExitUsage);
    CHECK(invoke({"walk", "--law", "uniform", "--steps", "0", "--seed", "1"}).code == cli::kExitUsage);
    CHECK(invoke({"regen", "--law", "uniform", "--ell", "0,0", "--seed", "1"}).code == cli::kExitUsage);
    // Too short to produce 32 certified blocks.
    const auto few = invoke({"regen", "--law", "expl", "--steps", "50", "--walks", "2", "--seed", "1", "--out",
                          (fs::temp_directory_path() / "rwre_cli_test_few").string()});
    CHECK(few.code == cli::kExitInsufficient);
    CHECK(invoke({"--help"}).code == 0);
    CHECK(invoke({"--version"}).out == std::string(kToolVersion) + "\n");
}

TEST_CASE("same config and seed give byte-identical files") {
    const auto dir = scratch("det");
    auto go = [&](const std::string& tag) {
        const auto p = (dir / tag).string();
        REQUIRE(invoke({"regen", "--law", "dirichlet", "--weights", "3,1,1,1", "--steps", "5000", "--walks", "20",
                     "--seed", "9", "--out", p})
                    .code == 0);
        return std::make_pair(slurp(p + ".csv"), slurp(p + ".json"));
    };
    const auto a = go("a"), b = go("b");
    CHECK(a.first == b.first);
    // The stamped config records the output path; everything else matches.
    auto ja = nlohmann::json::parse(a.second), jb = nlohmann::json::parse(b.second);
    CHECK(ja.at("config_hash") == jb.at("config_hash"));
    ja["config"].erase("output");
    jb["config"].erase("output");
    CHECK(ja == jb);
    fs::remove_all(dir);
}

TEST_CASE("config files round-trip through the command line") {
    const auto dir = scratch("cfg");
    const auto dumped = invoke({"walk", "--law", "trap_sym", "--d", "2", "--steps", "300", "--walks", "3", "--seed", "5",
                             "--dump-config"});
    REQUIRE(dumped.code == 0);
    const auto cfgPath = (dir / "c.json").string();
    std::ofstream(cfgPath) << dumped.out;

    const auto direct = invoke({"walk", "--law", "trap_sym", "--d", "2", "--steps", "300", "--walks", "3", "--seed", "5"});
    const auto viaFile = invoke({"walk", "--config", cfgPath});
    REQUIRE(direct.code == 0);
    CHECK(viaFile.out == direct.out);

    // Flags override file values, and the hash follows.
    const auto over = invoke({"walk", "--config", cfgPath, "--steps", "301"});
    REQUIRE(over.code == 0);
    CHECK(over.out != direct.out);
    CHECK(over.out.substr(0, over.out.find('\n')) != direct.out.substr(0, direct.out.find('\n')));

    const auto redump = invoke({"walk", "--config", cfgPath, "--dump-config"});
    CHECK(nlohmann::json::parse(redump.out) == nlohmann::json::parse(dumped.out));
    fs::remove_all(dir);
}

TEST_CASE("criteria and paths subcommands") {
    const auto c = invoke({"criteria", "--law", "uniform", "--d", "2", "--criterion", "E0", "--replicates", "100",
                        "--seed", "3"});
    REQUIRE(c.code == 0);
    const auto j = nlohmann::json::parse(c.out.substr(0, c.out.rfind("# criteria")));
    CHECK(j.at("result").at("criterion") == "E0");
    CHECK(j.at("result").at("verdict") == "satisfied-empirically");

    const auto p = invoke({"paths", "--law", "dirichlet", "--weights", "1,1,1,1", "--n", "4", "--replicates", "10",
                        "--seed", "3"});
    CHECK(p.code == 0);
    CHECK(p.out.find("bound held on 40/40") != std::string::npos);

    CHECK(invoke({"criteria", "--law", "uniform", "--criterion", "nope", "--seed", "3"}).code == cli::kExitUsage);
}
