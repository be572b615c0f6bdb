#include <iostream>

#include "fedvote/commands.hpp"

int main(int argc, char** argv) { return fedvote::cli::run_cli(argc, argv, std::cout, std::cerr); }
