#include <iostream>

#include "laneforge/app/cli.hpp"

int main(int argc, char** argv) {
  return laneforge::RunCli({argv + 1, argv + argc}, std::cout, std::cerr);
}
