#include <iostream>

#include "cbir/cli.hpp"

int main(int argc, char** argv) { return cbir::run_cli(argc, argv, std::cout, std::cerr); }
