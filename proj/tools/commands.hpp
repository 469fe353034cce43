#pragma once

namespace grankin::cli {

constexpr const char* version = "grankin 1.0.0";

// parses argv, runs one subcommand, writes its outputs and manifest.
// 0 ok, 1 other failure, 2 usage, 3 config, 4 failed numeric check
int dispatch(int argc, char** argv);

}  // namespace grankin::cli
