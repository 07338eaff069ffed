#include <iostream>

#include "greensplit/cli.hpp"

int main(int argc, char** argv) { return greensplit::run_cli(argc, argv, std::cout, std::cerr); }
