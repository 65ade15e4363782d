#include "percont/cli.hpp"

int main(int argc, char** argv) { return percont::cli::run(argc, argv); }
