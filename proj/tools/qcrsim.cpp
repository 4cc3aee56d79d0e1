#include "qcr/cli.hpp"

int main(int argc, char** argv) { return qcr::cli::run_cli(argc, argv); }
