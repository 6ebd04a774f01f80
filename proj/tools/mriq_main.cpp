#include "mriq/pipeline.hpp"

int main(int argc, char** argv) { return mriq::cli_main(argc, argv); }
