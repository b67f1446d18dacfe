#include <iostream>
#include <string>
#include <vector>

#include "amlc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return amlc::run_cli(args, std::cout, std::cerr);
}
