#include <iostream>

#include "tacnode/cli.hpp"

int main(int argc, char** argv) { return tacnode::cli::main_entry(argc, argv, std::cout, std::cerr); }
