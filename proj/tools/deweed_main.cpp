#include <iostream>

#include "deweed/cli.hpp"

int main(int argc, char** argv) { return deweed::cli::main_entry(argc, argv, std::cout, std::cerr); }
