#include <string>
#include <vector>

#include "svbrdf/cli.hpp"

int main(int argc, char** argv) {
    return svbrdf::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
