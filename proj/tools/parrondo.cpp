#include "parrondo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return parrondo::run_cli(args, std::cout, std::cerr);
}
