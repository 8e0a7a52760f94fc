#include "frwmax/cli.hpp"

int main(int argc, char** argv) { return frwmax::main_entry(argc, argv); }
