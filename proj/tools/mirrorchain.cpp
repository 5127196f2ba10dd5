#include <iostream>

#include "mirrorchain/cli.hpp"

int main(int argc, char** argv) { return mirrorchain::cli::run(argc, argv, std::cout, std::cerr); }
