#include <iostream>

#include "slump/cli.hpp"

int main(int argc, char** argv) {
  return slump::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
