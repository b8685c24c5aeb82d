#include <iostream>

#include "peec/io.hpp"

int main(int argc, char** argv) { return peec::run_command(argc, argv, std::cout, std::cerr); }
