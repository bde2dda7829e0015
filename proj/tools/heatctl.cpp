#include "heatctl/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return heatctl::cli::run(argc, argv, std::cout, std::cerr); }
