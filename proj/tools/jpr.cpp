#include "jpr/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return jpr::cli::run(argc, argv, std::cout, std::cerr);
}
