#include "symalign/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return symalign::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
