#include <iostream>
#include <string>
#include <vector>

#include "cellcov/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cellcov::cli::run(args, std::cout, std::cerr);
}
