#include "mdplab/cli.hpp"

int main(int argc, char** argv) { return mdplab::run_command(argc, argv); }
