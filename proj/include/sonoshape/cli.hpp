#pragma once

namespace sonoshape {

// Entry point of the command-line tool; exposed so tests can drive the
// subcommands in-process. Returns the process exit code: 0 on success,
// 2 on configuration failures, 1 on any other error.
int cli_main(int argc, const char* const* argv);

}  // namespace sonoshape
