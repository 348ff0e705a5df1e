#include <iostream>
#include <string>
#include <vector>

#include "latkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return latkit::run(args, std::cout, std::cerr);
}
