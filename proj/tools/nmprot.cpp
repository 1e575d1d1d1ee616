#include <string>
#include <vector>

#include "nmprot/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nmprot::cli::run(args);
}
