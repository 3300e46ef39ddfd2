#include "auvmae/cli.hpp"

int main(int argc, char** argv) { return auvmae::cli::run(argc, argv); }
