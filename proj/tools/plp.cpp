#include <iostream>
#include <string>
#include <vector>

#include "plp/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return plp::cli::run(args, std::cout, std::cerr);
}
