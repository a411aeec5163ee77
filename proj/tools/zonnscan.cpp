#include <iostream>
#include <string>
#include <vector>

#include "zonn/cli.hpp"

int main(int argc, char** argv) {
  return zonn::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
