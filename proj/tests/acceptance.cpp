// Runs every acceptance criterion and prints one pass/fail line per criterion.

#include <cstdlib>
#include <iostream>
#include <string>

#include "rwre/acceptance.hpp"

int main(int argc, char** argv) {
    rwre::acceptance::Options opts;
    opts.outDir = argc > 1 ? argv[1] : "acceptance_out";
    if (argc > 2) opts.seed = std::stoull(argv[2]);
    try {
        const auto results = rwre::acceptance::run(opts, &std::cout);
        int failed = 0;
        for (const auto& r : results) failed += !r.pass;
        std::cout << (results.size() - failed) << "/" << results.size() << " acceptance criteria passed" << std::endl;
        return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << '\n';
        return EXIT_FAILURE;
    }
}
