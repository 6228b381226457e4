#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cmc::cli::run(argc, argv, std::cout, std::cerr); }
