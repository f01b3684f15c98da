#include "coulomb_lab/cli.hpp"

int main(int argc, char** argv) { return clab::cli::main(argc, argv); }
