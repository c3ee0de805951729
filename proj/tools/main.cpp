#include <iostream>
#include <string>
#include <vector>

#include "lsc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return lsc::run_cli(args, std::cout, std::cerr);
}
