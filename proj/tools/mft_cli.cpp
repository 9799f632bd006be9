#include "mft/cli.hpp"

int main(int argc, char** argv) {
    return mft::cli::run({argv + 1, argv + argc});
}
