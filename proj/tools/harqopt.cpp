#include "harqopt/cli/run.hpp"

int main(int argc, char** argv) { return harqopt::cli::main_entry(argc, argv); }
