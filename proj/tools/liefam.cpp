#include <iostream>

#include "liefam/cli.hpp"

int main(int argc, char** argv) { return liefam::run_cli(argc, argv, std::cout, std::cerr); }
