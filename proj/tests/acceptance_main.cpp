// acceptance suite runner: one pass/fail line per criterion
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "cusp/verify.hpp"

int main(int argc, char** argv) {
    cusp::AcceptanceOptions opts;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) {
            opts.quick = true;
        } else if (std::strcmp(argv[i], "--criteria") == 0 && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) opts.criteria.push_back(std::stoi(tok));
        } else if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
            opts.out_dir = argv[++i];
        } else {
            std::fprintf(stderr, "usage: %s [--quick] [--criteria 1,2,...] [--out dir]\n",
                         argv[0]);
            return 1;
        }
    }
    const auto results = cusp::run_acceptance(opts);
    bool all = !results.empty();
    for (const auto& res : results) all = all && res.pass;
    return all ? 0 : 3;
}
