#include "cocyclab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cocyclab::run_cli(argc, argv, std::cout, std::cerr); }
