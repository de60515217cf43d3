#include "kinopt/cli.hpp"

int main(int argc, char** argv) { return kinopt::run_cli(argc, argv); }
