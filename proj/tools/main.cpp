#include <iostream>

#include "fibermem/cli.hpp"

int main(int argc, char** argv) { return fibermem::cli::run(argc, argv, std::cout, std::cerr); }
