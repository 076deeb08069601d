#include <iostream>

#include "qpalm/cli.hpp"

int main(int argc, char** argv) {
  return qpalm::cli_main(argc, argv, std::cout, std::cerr);
}
