#include <iostream>

#include "fesf/cli.hpp"

int main(int argc, char** argv) { return fesf::cli::run(argc, argv, std::cout, std::cerr); }
