#include "csf/cli.hpp"

int main(int argc, char** argv) { return csf::main_entry(argc, argv); }
