#include "qlab/cli.hpp"

int main(int argc, char** argv) { return qlab::cli::run(argc, argv); }
