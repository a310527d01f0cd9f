#include "mdcycles/cli.hpp"

int main(int argc, char** argv) { return mdcycles::cli::run(argc, argv); }
