#include "panelstat/cli.hpp"

int main(int argc, char** argv) { return panelstat::run_cli(argc, argv); }
