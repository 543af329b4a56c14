#include <iostream>

#include "arena/cli.hpp"

int main(int argc, char** argv) {
    return arena::cli::dispatch(argc, argv, std::cout, std::cerr);
}
