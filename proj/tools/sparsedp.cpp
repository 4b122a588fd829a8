#include "sparsedp/cli.hpp"

int main(int argc, char **argv) { return sparsedp::run_cli(argc, argv); }
