#include "ergostab/cli.hpp"

int main(int argc, char** argv) { return ergostab::run_cli(argc, argv); }
