#include "wedgelab/cli.hpp"

int main(int argc, char** argv) { return wedgelab::cli::run(argc, argv); }
