#include <iostream>

#include "bbfmm/cli.hpp"

int main(int argc, char** argv) { return bbfmm::cli::run(argc, argv, std::cout, std::cerr); }
