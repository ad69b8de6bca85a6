#ifndef SCENEGEN_CLI_HPP_
#define SCENEGEN_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace scenegen {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

// args excludes the program name.
int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scenegen

#endif  // SCENEGEN_CLI_HPP_
