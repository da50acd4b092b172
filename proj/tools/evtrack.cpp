#include <iostream>

#include "evtrack/cli.hpp"

int main(int argc, char** argv) { return evtrack::cli::run(argc, argv, std::cout, std::cerr); }
