#include "logeuc/cli.hpp"

int main(int argc, char** argv) { return logeuc::run_cli(argc, argv); }
