#include "dcv/cli.hpp"

int main(int argc, char** argv) { return dcv::run_cli(argc, argv); }
