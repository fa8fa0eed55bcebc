#include "helfrich/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return helfrich::run_cli(argc, argv, std::cout, std::cerr); }
