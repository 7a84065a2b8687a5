#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "chainforge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> env_seed;
  if (const char* s = std::getenv("CHAINFORGE_SEED")) env_seed = s;
  return chainforge::cli::run_cli(args, std::cout, std::cerr, env_seed);
}
