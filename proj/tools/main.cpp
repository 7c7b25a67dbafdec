#include "ler/gateway.hpp"

int main(int argc, char** argv) { return ler::gateway::run_cli(argc, argv); }
