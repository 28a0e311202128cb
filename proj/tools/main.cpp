#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return wvq::cli::run(argc, argv, std::cout, std::cerr); }
