#include <iostream>

#include "wfc/cli.hpp"

int main(int argc, char** argv) { return wfc::run_cli({argv + 1, argv + argc}, std::cout, std::cerr); }
