#include <iostream>
#include <string>
#include <vector>

#include "dialect_audit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dialect_audit::cli::dispatch(args, std::cout, std::cerr);
}
