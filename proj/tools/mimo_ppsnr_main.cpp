#include <iostream>

#include "mimo_ppsnr/cli.hpp"

int main(int argc, char** argv) { return mimo::cli::run_main(argc, argv, std::cout, std::cerr); }
