#include <iostream>

#include "ehrenfest/cli.hpp"

int main(int argc, char** argv) { return ehrenfest::cli::run_cli(argc, argv, std::cout, std::cerr); }
