#include <iostream>
#include <string>
#include <vector>

#include "fbcom/cli.hpp"

int main(int argc, char** argv) {
  return fbcom::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
