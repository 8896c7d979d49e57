#pragma once

#include <string>

// Paths injected by the test runner's command line (see doctest_main.cpp);
// empty when the test was started without them.
namespace testenv {
extern std::string cli_path;  // built rfkm binary
extern std::string data_dir;  // repository data/ directory
}  // namespace testenv
