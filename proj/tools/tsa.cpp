#include <iostream>

#include "tsa/cli.hpp"

int main(int argc, char** argv) { return tsa::cli::run(argc, argv, std::cout, std::cerr); }
