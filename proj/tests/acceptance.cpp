// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failing criteria.

#include "dtnoise/report.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    std::string tables = dtnoise::default_table_path();
    int threads = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--tables" && i + 1 < argc)
            tables = argv[++i];
        else if (arg == "--threads" && i + 1 < argc)
            threads = std::atoi(argv[++i]);
        else {
            std::cerr << "usage: acceptance [--tables FILE] [--threads N]\n";
            return 2;
        }
    }
    try {
        return dtnoise::run_acceptance(std::cout, tables, threads);
    } catch (const std::exception& e) {
        std::cerr << "acceptance suite aborted: " << e.what() << "\n";
        return 3;
    }
}
