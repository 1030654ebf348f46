#include <iostream>

#include "cnma/cli.hpp"

int main(int argc, char** argv) { return cnma::run_cli(argc, argv, std::cout, std::cerr); }
