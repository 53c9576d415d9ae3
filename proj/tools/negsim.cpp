#include <iostream>

#include "neg/cli/commands.hpp"

int main(int argc, char** argv) {
    return neg::cli::run_cli(argc, argv, std::cout, std::cerr);
}
