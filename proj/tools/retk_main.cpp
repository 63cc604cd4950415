#include "retk/cli.hpp"

int main(int argc, char** argv) { return retk::run_cli(argc, argv); }
