#include "otmap/cli.hpp"

int main(int argc, char** argv) { return otmap::run_cli(argc, argv); }
