#include "probsel/cli.hpp"

#include <iostream>

int main(int argc, char **argv) {
    return probsel::cli_main(argc, argv, std::cout, std::cerr);
}
