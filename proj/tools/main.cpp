#include "anoml/cli.hpp"

int main(int argc, char** argv) { return anoml::run_cli(argc, argv); }
