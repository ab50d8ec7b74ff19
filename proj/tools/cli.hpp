#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lastzero::cli {

enum ExitCode : int {
    kOk = 0,
    kBadArgs = 2,
    kNonConvergence = 3,
    kIoError = 4,
    kSchemaMismatch = 5,
    kInternal = 1,
};

/// Runs `lastzero <subcommand> ...`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lastzero::cli
