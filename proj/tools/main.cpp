#include "limtest/cli.hpp"

int main(int argc, char** argv) { return limtest::run_cli(argc, argv); }
