#include "pulsehr/cli.hpp"

int main(int argc, char** argv) { return pulsehr::cli::run(argc, argv); }
