#include "ssvd/cli.hpp"

int main(int argc, char** argv) { return ssvd::cli_main(argc, argv); }
