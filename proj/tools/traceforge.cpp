#include "traceforge/cli.hpp"

int main(int argc, char** argv) { return traceforge::cli::dispatch(argc, argv); }
