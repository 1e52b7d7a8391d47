#include <iostream>

#include "homsim/cli.hpp"

int main(int argc, char** argv) { return homsim::run_cli(argc, argv, std::cout, std::cerr); }
