#include <iostream>

#include "dichotome/cli.hpp"

int main(int argc, char** argv) { return dichotome::cli::run(argc, argv, std::cout, std::cerr); }
