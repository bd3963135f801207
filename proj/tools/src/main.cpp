#include <iostream>

#include "netstream/cli.hpp"

int main(int argc, char** argv) {
  return netstream::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
