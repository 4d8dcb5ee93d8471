#include "cablesoup/cli.hpp"

int main(int argc, char** argv) { return cablesoup::run(argc, argv); }
