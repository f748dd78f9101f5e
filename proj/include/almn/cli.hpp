#ifndef ALMN_CLI_HPP
#define ALMN_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace almn {

/// Process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitDivergence = 4,
  kExitGradCheckFailed = 5,
};

/// Entry point shared by the `almn` binary and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace almn

#endif  // ALMN_CLI_HPP
