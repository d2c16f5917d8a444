#include <iostream>

#include "riccati_lab/cli.hpp"

int main(int argc, char** argv) {
  return riccati_lab::cli::run(argc, argv, std::cout, std::cerr);
}
