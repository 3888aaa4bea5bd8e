#include <iostream>

#include "propmat/cli.hpp"

int main(int argc, char** argv) {
    return propmat::cli::run(argc, argv, std::cout, std::cerr);
}
