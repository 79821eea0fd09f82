#include "discover/cli.hpp"

int main(int argc, char** argv) { return discover::cli::main(argc, argv); }
