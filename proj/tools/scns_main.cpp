#include <iostream>

#include "scns/cli.hpp"

int main(int argc, char** argv)
{
    return scns::cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
