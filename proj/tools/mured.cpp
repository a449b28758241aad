#include "mured/cli.hpp"

int main(int argc, char** argv) { return mured::cli::run(argc, argv); }
