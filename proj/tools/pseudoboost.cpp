#include "pseudoboost/harness.hpp"

int main(int argc, char** argv) { return pseudoboost::run_cli(argc, argv); }
