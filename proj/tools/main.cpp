#include "jtsim/cli.hpp"

int main(int argc, char** argv) { return jtsim::cli::run(argc, argv); }
