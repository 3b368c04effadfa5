#include <string>
#include <vector>

#include "ltn/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return ltn::run_cli(args);
}
