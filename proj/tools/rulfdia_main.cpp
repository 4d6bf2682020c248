#include <iostream>

#include "rulfdia/cli/commands.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return rulfdia::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
