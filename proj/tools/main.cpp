#include <iostream>

#include "qcmd/cli.hpp"

int main(int argc, char** argv) { return qcmd::run_cli(argc, argv, std::cout, std::cerr); }
