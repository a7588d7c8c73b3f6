#include "flare/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return flare::run_cli(argc, argv, std::cout, std::cerr); }
