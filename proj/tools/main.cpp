#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return bell_lab::cli::run(argc, argv, std::cout, std::cerr); }
