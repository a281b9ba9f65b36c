#include "hatelab/cli.hpp"

int main(int argc, char** argv) { return hatelab::run_cli(argc, argv); }
