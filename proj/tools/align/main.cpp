#include <iostream>

#include "align/cli.hpp"

int main(int argc, char** argv) { return align::cli::run_cli(argc, argv, std::cout, std::cerr); }
