#include "sonoshape/cli.hpp"

int main(int argc, char** argv) { return sonoshape::cli_main(argc, argv); }
