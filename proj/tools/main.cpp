#include "dergame/cli.hpp"

int main(int argc, char** argv) { return dergame::run_cli(argc, argv); }
