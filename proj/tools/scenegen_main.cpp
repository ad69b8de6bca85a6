#include <iostream>
#include <string>
#include <vector>

#include "scenegen/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scenegen::cli(args, std::cout, std::cerr);
}
