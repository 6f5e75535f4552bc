#include <iostream>

#include "bilatrr_cli/app.hpp"

int main(int argc, char** argv) { return bilatrr::cli::run(argc, argv, std::cout, std::cerr); }
