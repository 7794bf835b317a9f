#include "fenvm/cli.hpp"

int main(int argc, char** argv)
{
    return fenvm::run_cli(argc, argv);
}
