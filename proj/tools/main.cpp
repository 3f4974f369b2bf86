#include "cli.hpp"

int main(int argc, char** argv) { return ensfts::cli::run(argc, argv); }
