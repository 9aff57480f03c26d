#include <iostream>
#include <string>
#include <vector>

#include "backcache/cli.hpp"

int main(int argc, char** argv) {
  return backcache::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
