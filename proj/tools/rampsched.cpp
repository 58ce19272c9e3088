#include "rampsched/cli.hpp"

int main(int argc, char** argv) { return rampsched::cli::main(argc, argv); }
