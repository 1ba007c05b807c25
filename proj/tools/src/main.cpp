#include "despd/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return despd::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
