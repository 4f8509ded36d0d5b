#include "cubix/cli.hpp"

int main(int argc, char** argv) { return cubix::cli::main(argc, argv); }
