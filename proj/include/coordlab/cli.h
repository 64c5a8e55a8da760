#pragma once

namespace coordlab {

// Full command-line surface; returns the process exit code
// (0 ok, 2 user/config error, 3 data error).
int run_cli(int argc, char** argv);

}  // namespace coordlab
