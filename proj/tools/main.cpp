#include "mather/cli.hpp"

int main(int argc, char** argv) { return mather::run_cli(argc, argv); }
