#include "coxsat/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return coxsat::cli::run(argc, argv, std::cout, std::cerr); }
