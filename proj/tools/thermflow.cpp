#include "thermflow/cli.hpp"

int main(int argc, char** argv) { return thermflow::run_cli(argc, argv); }
