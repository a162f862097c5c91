#include <iostream>

#include "synodsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return synodsim::cli::run_cli(args, std::cout, std::cerr);
}
