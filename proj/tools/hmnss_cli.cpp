#include <iostream>

#include "hmnss/cli.hpp"

int main(int argc, char** argv) { return hmnss::run_cli(argc, argv, std::cout, std::cerr); }
