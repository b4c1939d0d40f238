#include <iostream>

#include "forge/cli.hpp"

int main(int argc, char** argv) {
    forge::cli::install_signal_handlers();
    return forge::cli::run_command(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
