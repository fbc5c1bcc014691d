#include "grokmlp/cli.hpp"

int main(int argc, char** argv) { return grokmlp::run_cli(argc, argv); }
