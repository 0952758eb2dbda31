#include <iostream>

#include "cbn/cli.hpp"

int main(int argc, char** argv) { return cbn::run_cli(argc, argv, std::cout, std::cerr); }
