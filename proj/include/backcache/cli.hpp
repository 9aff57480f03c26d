#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace backcache::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kInputData = 3,
  kInternal = 4,
};

/// Runs the `backcache` command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace backcache::cli
