#include <iostream>

#include "nucleon/cli.hpp"

int main(int argc, char** argv) { return nucleon::run_cli(argc, argv, std::cout, std::cerr); }
