#pragma once

namespace emocue::cli {

/// Parses arguments and runs one subcommand. Returns the process exit code:
/// 0 success, 1 failed validation or a library error, 2 usage error.
int run(int argc, char** argv);

}  // namespace emocue::cli
