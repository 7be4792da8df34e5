#include "rbb/cli.hpp"

int main(int argc, char** argv) { return rbb::run_cli(argc, argv); }
