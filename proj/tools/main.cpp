#include <string>
#include <vector>

#include "scopemetrics/cli.hpp"

int main(int argc, char** argv) {
  return scopemetrics::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
