#include <iostream>

#include "tdr/cli.hpp"

int main(int argc, char** argv) { return tdr::cli::run(argc, argv, std::cout, std::cerr); }
