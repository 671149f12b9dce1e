#include "mathdef/cli.hpp"

int main(int argc, char** argv) { return mathdef::cli::run(argc, argv); }
