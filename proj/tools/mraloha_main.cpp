#include <iostream>
#include <string>
#include <vector>

#include "mraloha/experiments.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return mraloha::cli_main(args, std::cout, std::cerr);
}
