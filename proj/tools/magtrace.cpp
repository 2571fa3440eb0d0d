#include <iostream>

#include "magtrace/cli.hpp"

int main(int argc, char** argv) { return magtrace::cli::main(argc, argv, std::cout, std::cerr); }
