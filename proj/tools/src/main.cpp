#include <iostream>

#include "skillforge/cli.hpp"

int main(int argc, char** argv) { return skillforge::cli_main(argc, argv, std::cout, std::cerr); }
