#include <iostream>

#include "spectral_forge/cli.hpp"

int main(int argc, char** argv) { return spectral_forge::run_command(argc, argv, std::cout, std::cerr); }
