#include <bispectra/cli.hpp>

#include <iostream>

int main(int argc, char** argv) {
    return bispectra::cli::run(argc, argv, std::cout, std::cerr);
}
