#include "ncdkit/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return ncdkit::run_cli(argc, argv, std::cout, std::cerr);
}
