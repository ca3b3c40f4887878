#include <iostream>

#include "onramp/cli.hpp"

int main(int argc, char** argv) { return onramp::cli::main(argc, argv, std::cout, std::cerr); }
