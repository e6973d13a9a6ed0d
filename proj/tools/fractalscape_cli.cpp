#include "fractalscape/cli.hpp"

int main(int argc, char** argv) { return fractalscape::cli::run(argc, argv); }
