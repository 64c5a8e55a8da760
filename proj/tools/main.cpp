#include "coordlab/cli.h"

int main(int argc, char** argv) { return coordlab::run_cli(argc, argv); }
