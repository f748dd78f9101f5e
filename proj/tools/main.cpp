#include <iostream>
#include <string>
#include <vector>

#include "almn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return almn::run_cli(args, std::cout, std::cerr);
}
