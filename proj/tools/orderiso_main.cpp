#include "orderiso/cli.hpp"

int main(int argc, char** argv) { return orderiso::cli::main_entry(argc, argv); }
