#include "fbp/cli.hpp"

int main(int argc, char** argv) { return fbp::cli::run_cli(argc, argv); }
