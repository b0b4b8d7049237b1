#include "cli.hpp"

int main(int argc, char** argv) { return fvqtl::cli::main(argc, argv); }
