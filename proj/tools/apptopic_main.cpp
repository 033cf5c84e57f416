#include <iostream>
#include <string>
#include <vector>

#include "apptopic/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return apptopic::run_cli(args, std::cout, std::cerr);
}
