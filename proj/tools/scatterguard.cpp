#include <iostream>

#include "scatterguard/cli.hpp"

int main(int argc, char** argv) {
  return scatterguard::cli::main_entry(argc, argv, std::cout, std::cerr);
}
