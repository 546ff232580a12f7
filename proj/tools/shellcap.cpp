#include <iostream>
#include <string>
#include <vector>

#include "shellcap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return shellcap::cli::run(args, std::cout, std::cerr);
}
