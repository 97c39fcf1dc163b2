#include <iostream>

#include "vlsf/cli.hpp"

int main(int argc, char** argv) { return vlsf::run_cli(argc, argv, std::cout, std::cerr); }
