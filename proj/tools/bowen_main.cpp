#include <iostream>

#include "bowen/cli.hpp"

int main(int argc, char** argv) { return bowen::run_cli(argc, argv, std::cout, std::cerr); }
