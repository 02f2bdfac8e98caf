#include "qpufsim/cli.hpp"

int main(int argc, char** argv) { return qpufsim::run_cli(argc, argv); }
