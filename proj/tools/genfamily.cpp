#include "heightlab/report.hpp"
#include "heightlab/wehler.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace heightlab;
    CLI::App app{"Generate a random Wehler family with marked sections"};
    uint64_t seed = 1;
    int sections = 2, tdeg = 1;
    bool periodic = true;
    std::vector<int> word = {1, 2, 3};
    std::string out;
    std::string name;
    app.add_option("--seed", seed);
    app.add_option("--sections", sections, "random constant sections");
    app.add_option("--tdeg", tdeg, "degree of the pencil in t");
    app.add_option("--word", word)->delimiter(',');
    app.add_option("--name", name);
    app.add_flag("!--no-periodic", periodic, "omit the 2-periodic section");
    app.add_option("--out", out);
    CLI11_PARSE(app, argc, argv);

    try {
        SurfaceFamily fam = generate_family(seed, periodic, sections, tdeg, word);
        if (!name.empty()) fam.name = name;
        write_text(out, family_to_json(fam) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "genfamily: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
