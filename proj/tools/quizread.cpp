#include <iostream>
#include <string>
#include <vector>

#include "quizread/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return quizread::run_cli(args, std::cout, std::cerr);
}
