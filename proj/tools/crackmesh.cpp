#include <iostream>

#include "crackmesh/cli/cli.hpp"

int main(int argc, char** argv) {
  return crackmesh::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
