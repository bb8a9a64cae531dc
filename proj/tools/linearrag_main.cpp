#include <iostream>

#include "linearrag/cli.hpp"

int main(int argc, char** argv) { return linearrag::run_cli(argc, argv, std::cout, std::cerr); }
