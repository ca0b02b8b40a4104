#include <iostream>

#include "elicit/cli.hpp"

int main(int argc, char** argv) {
  return elicit::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
