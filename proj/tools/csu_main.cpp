#include <iostream>
#include <string>
#include <vector>

#include "csu/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return csu::cli::run(args, std::cout, std::cerr);
}
