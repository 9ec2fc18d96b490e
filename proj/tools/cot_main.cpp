#include <iostream>

#include "cot/cli.hpp"

int main(int argc, char** argv) { return cot::run_cli(argc, argv, std::cout, std::cerr); }
