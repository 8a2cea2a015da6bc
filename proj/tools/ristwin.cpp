#include <iostream>

#include "ris/cli.hpp"

int main(int argc, char** argv) {
  return ris::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
