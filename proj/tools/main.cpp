#include "portastat/cli.hpp"

int main(int argc, char** argv) { return portastat::cli::run(argc, argv); }
