#pragma once

// The acceptance suite: twelve end-to-end checks, each writing its artifacts
// to an output directory and reporting one pass/fail line.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace rwre::acceptance {

struct Options {
    std::uint64_t seed = 20240601;
    std::string outDir = "acceptance_out";
    bool determinism = true;  // criterion 12 reruns 1-11 into a second directory
};

struct Outcome {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string summary;
    double seconds = 0.0;
    nlohmann::json details;
};

/// "[PASS] 01 title: summary (12.3 s)".
std::string line(const Outcome& o);

/// Runs criteria 1-11, writing artifacts under dir.
std::vector<Outcome> run_criteria(std::uint64_t seed, const std::string& dir, std::ostream* progress);

/// Full suite including the determinism rerun; progress lines go to `progress`.
std::vector<Outcome> run(const Options& opts, std::ostream* progress);

/// Byte comparison of every regular file under two directories.
bool identical_trees(const std::string& a, const std::string& b, std::string* firstDifference);

}  // namespace rwre::acceptance
