#include "nrfse/cli.hpp"

int main(int argc, char** argv) { return nrfse::cli::run_cli(argc, argv); }
