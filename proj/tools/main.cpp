#include <iostream>

#include "eucgov/cli/cli.hpp"

int main(int argc, char** argv) { return eucgov::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
