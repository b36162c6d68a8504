#include <iostream>
#include <string>
#include <vector>

#include "ease/cli.h"

int main(int argc, char** argv) {
  return ease::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
