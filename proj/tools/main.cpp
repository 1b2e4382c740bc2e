#include "gnep/cli.hpp"

int main(int argc, char **argv) { return gnep::cli::run_main(argc, argv); }
