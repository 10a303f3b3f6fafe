#include <iostream>
#include <string>
#include <vector>

#include "rwre/cli.hpp"

int main(int argc, char** argv) {
    return rwre::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
