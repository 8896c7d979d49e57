#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstring>
#include <vector>

#include "support/test_env.hpp"

namespace testenv {
std::string cli_path;
std::string data_dir;
}  // namespace testenv

// Consumes --cli=... and --data=... before handing the rest to doctest.
int main(int argc, char** argv) {
    std::vector<char*> rest;
    for (int i = 0; i < argc; ++i) {
        if (std::strncmp(argv[i], "--cli=", 6) == 0)
            testenv::cli_path = argv[i] + 6;
        else if (std::strncmp(argv[i], "--data=", 7) == 0)
            testenv::data_dir = argv[i] + 7;
        else
            rest.push_back(argv[i]);
    }
    doctest::Context context(static_cast<int>(rest.size()), rest.data());
    return context.run();
}
