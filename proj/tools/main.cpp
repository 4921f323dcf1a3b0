#include "bookend/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return bookend::cli::run(argc, argv, std::cout, std::cerr); }
