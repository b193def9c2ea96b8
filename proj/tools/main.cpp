#include "nrcid/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return nrcid::run_cli(argc, argv, std::cout, std::cerr);
}
