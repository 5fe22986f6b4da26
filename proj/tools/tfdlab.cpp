#include "tfdlab/cli.hpp"

int main(int argc, char** argv) { return tfdlab::cli::run(argc, argv); }
