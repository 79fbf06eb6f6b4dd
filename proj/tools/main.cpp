#include <string>
#include <vector>

#include "udt/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return udt::run_cli(args);
}
