#include <iostream>

#include "covsv/cli/run.hpp"

int main(int argc, char** argv) { return covsv::cli::run(argc, argv, std::cout, std::cerr); }
