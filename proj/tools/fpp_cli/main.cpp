#include "app.hpp"

int main(int argc, char** argv) { return fpp::cli::run_cli(argc, argv); }
