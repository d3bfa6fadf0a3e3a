#include <string>
#include <vector>

#include "oscimarket/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return oscimarket::cli::run(args);
}
