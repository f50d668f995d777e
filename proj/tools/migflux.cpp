#include <iostream>

#include "migflux/cli.hpp"

int main(int argc, char** argv) {
    const auto inv = migflux::cli::parse_args(argc, argv, std::cout, std::cerr);
    return migflux::cli::run(inv, std::cerr);
}
