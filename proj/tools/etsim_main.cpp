#include <iostream>

#include "etsim/harness.hpp"

int main(int argc, char** argv) { return etsim::harness::run_cli(argc, argv, std::cout, std::cerr); }
