#include "sharpe/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return sharpe::cli::run(argc, argv, std::cout, std::cerr); }
