#include <iostream>

#include "rramcim/cli.hpp"

int main(int argc, char** argv) { return rramcim::cli::run(argc, argv, std::cout, std::cerr); }
