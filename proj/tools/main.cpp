#include "loralab/cli.hpp"

int main(int argc, char** argv) { return loralab::cli_main(argc, argv); }
