#include "phaselim/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return phaselim::cli::run(args, std::cout, std::cerr);
}
