#include "densreg/cli.hpp"

int main(int argc, char** argv) { return densreg::cli::run(argc, argv); }
