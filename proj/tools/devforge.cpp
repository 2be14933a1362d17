#include "devforge/cli.hpp"

int main(int argc, char** argv) {
    return devforge::cli::run_command(argc, argv);
}
