#include <iostream>

#include "bipot/cli.hpp"

int main(int argc, char** argv) { return bipot::cli::main_entry(argc, argv, std::cout, std::cerr); }
