#include <sosw/cli.hpp>

int main(int argc, char** argv) { return sosw::cli::main(argc, argv); }
