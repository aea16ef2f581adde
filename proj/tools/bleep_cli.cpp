#include "bleep/cli.hpp"

int main(int argc, char** argv) {
    return bleep::cli::run(argc, argv);
}
