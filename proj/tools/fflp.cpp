#include <iostream>

#include "fflp/cli.hpp"

int main(int argc, char** argv) { return fflp::cli::main(argc, argv, std::cout, std::cerr); }
