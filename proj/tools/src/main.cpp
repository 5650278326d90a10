#include <iostream>

#include "seasoncast_cli/commands.hpp"

int main(int argc, char** argv) { return seasoncast::cli::run(argc, argv, std::cout, std::cerr); }
