#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace quizread {

// Entry point of the quizread command; `args` excludes the program name.
//
//   quizread gen FILE.pdf [--kind K] [--count N] [--pages a-b,c] [--out PATH] ...
//   quizread serve [--config FILE] [--addr HOST:PORT] ...
//
// gen exits 0 when every page succeeded, 2 when some failed and 1 on
// invalid input or total failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quizread
