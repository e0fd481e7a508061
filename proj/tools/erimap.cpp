#include "erimap/cli.hpp"

int main(int argc, char** argv) { return erimap::cli::run(argc, argv); }
