// Regenerates the synthetic trace bundle under tests/fixtures.
//
//   make_fixtures <output-dir>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "vvt/synthetic.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <output-dir>\n";
        return 2;
    }
    const std::filesystem::path dir(argv[1]);
    std::filesystem::create_directories(dir);
    const vvt::synthetic::Bundle bundle;
    const auto traces = vvt::synthetic::make_traces(bundle);
    for (const auto& t : traces) {
        const auto path = dir / (t.name + ".csv");
        std::ofstream out(path);
        out << "# synthetic: mu_k " << bundle.mu_k << ", part noise " << bundle.noise << " of range\n";
        vvt::write_trace(out, t);
        std::cout << path.string() << '\n';
    }
    return 0;
}
