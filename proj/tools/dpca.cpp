#include "dpca/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dpca::cli::run(args, std::cout, std::cerr);
}
