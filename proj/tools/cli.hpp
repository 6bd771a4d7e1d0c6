#pragma once

namespace hmtraj::cli {

/// Runs the command line and returns the process exit code (0, 1 or 2).
int run(int argc, char** argv);

}  // namespace hmtraj::cli
