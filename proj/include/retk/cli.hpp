#pragma once

namespace retk {

// Full command-line entry point. Returns the process exit status:
// 0 success, 1 usage error, 2 data/file error, 3 internal error.
int run_cli(int argc, char** argv);

}  // namespace retk
