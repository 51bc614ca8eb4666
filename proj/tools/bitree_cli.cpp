#include <iostream>

#include "bitree/cli.hpp"

int main(int argc, char** argv) { return bitree::cli::run(argc, argv, std::cout, std::cerr); }
