#include <iostream>
#include <string>
#include <vector>

#include "pairfilter/cli/cli.h"

int main(int argc, char** argv) {
  return pairfilter::RunCli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
