#include "commands.hpp"

int main(int argc, char** argv) { return grankin::cli::dispatch(argc, argv); }
