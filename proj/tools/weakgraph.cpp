#include <string>
#include <vector>

#include "weakgraph/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return weakgraph::cli::run(args);
}
