#include "banditlab/cli.hpp"

int main(int argc, char** argv) { return banditlab::cli::run_cli(argc, argv); }
