#include "cli.hpp"

int main(int argc, char** argv) { return hmtraj::cli::run(argc, argv); }
