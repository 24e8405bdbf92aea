#include <iostream>

#include "sgdg/cli.hpp"

int main(int argc, char** argv) { return sgdg::run_cli(argc, argv, std::cout, std::cerr); }
