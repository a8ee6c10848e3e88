#include "commands.hpp"

int main(int argc, char** argv) { return emocue::cli::run(argc, argv); }
