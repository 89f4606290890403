#include "specforge/cli.hpp"

int main(int argc, char** argv) { return specforge::cli::run(argc, argv); }
