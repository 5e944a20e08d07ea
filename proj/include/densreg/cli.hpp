#pragma once

namespace densreg::cli {

/// Entry point of the command-line tool; returns the process exit code.
int run(int argc, char** argv);

}  // namespace densreg::cli
