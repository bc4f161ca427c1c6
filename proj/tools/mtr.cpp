#include <iostream>

#include "mtr/cli.hpp"

int main(int argc, char** argv) { return mtr::run_cli(argc, argv, std::cout, std::cerr); }
