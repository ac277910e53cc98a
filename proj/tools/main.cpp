#include "zoneseq/cli.hpp"

int main(int argc, char** argv) { return zoneseq::cli::run(argc, argv); }
