// Writes the canonical input spec files. Usage: selfsim-gendata [out_dir]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "datafiles.hpp"

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        std::cerr << "cannot create " << dir << ": " << ec.message() << "\n";
        return 1;
    }
    for (const auto& [name, content] : selfsim::datafiles::all()) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            std::cerr << "cannot write " << (dir / name) << "\n";
            return 1;
        }
        f << content;
        std::cout << (dir / name).string() << "\n";
    }
    return 0;
}
