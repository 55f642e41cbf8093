#include <iostream>

#include "shopper/cli.hpp"

int main(int argc, char** argv) { return shopper::run_cli(argc, argv, std::cout, std::cerr); }
