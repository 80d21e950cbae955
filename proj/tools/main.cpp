#include "rhmpc/cli.hpp"

int main(int argc, char** argv) { return rhmpc::cli::main(argc, argv); }
