#include <iostream>

#include "irk/cli.hpp"

int main(int argc, char** argv) { return irk::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
