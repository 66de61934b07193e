#include <iostream>

#include "dermabench/cli/commands.hpp"

int main(int argc, char** argv) {
  return dermabench::cli::run_cli(argc, argv, std::cout, std::cerr);
}
