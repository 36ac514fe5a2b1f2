#include <iostream>

#include "pctl/cli.hpp"

int main(int argc, char** argv) { return pctl::run_cli(argc, argv, std::cout, std::cerr); }
