#include <iostream>

#include "vesicle/cli.hpp"

int main(int argc, char** argv) { return vesicle::run_cli(argc, argv, std::cout, std::cerr); }
