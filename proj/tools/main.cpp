#include "cohstat/cli.hpp"

int main(int argc, char** argv) { return cohstat::cli::cli_main(argc, argv); }
