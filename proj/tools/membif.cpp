#include <iostream>

#include "membif/cli.hpp"

int main(int argc, char** argv) { return membif::cli::main(argc, argv, std::cout, std::cerr); }
