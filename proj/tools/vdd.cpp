#include "vdd/cli.hpp"

#include <iostream>

int main( int argc, char** argv ) { return vdd::cli::run_cli( argc, argv, std::cout, std::cerr, std::cin ); }
