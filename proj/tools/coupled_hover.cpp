#include <iostream>

#include "coupled_hover/cli.hpp"

int main(int argc, char** argv) { return coupled_hover::run_cli(argc, argv, std::cout, std::cerr); }
