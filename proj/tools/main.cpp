// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#include <iostream>

#include "espr/cli.hpp"

int main(int argc, char** argv) {
    return espr::run_cli(argc, argv, std::cout, std::cerr);
}
