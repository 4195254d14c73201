#include "mfof/cli.hpp"

int main(int argc, char** argv) { return mfof::cli::run(argc, argv); }
