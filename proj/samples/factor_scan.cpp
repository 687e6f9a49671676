// Scan a number for factors at a few CNOT qualities and print the candidate sets.
//
//   factor_scan [N] [photons]

#include <cstdio>
#include <cstdlib>

#include "qphase/gauss.hpp"

int main(int argc, char** argv)
{
    qphase::GaussConfig cfg;
    cfg.n_target = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 5005;
    cfg.photons = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 3;
    cfg.res.chi = 1.0;
    cfg.res.gamma = 6.92e-6;

    for (double eps : {1.0, 0.99, 0.95, 0.9, 0.8}) {
        cfg.epsilon = eps;
        const auto report = qphase::classify_factors(cfg);
        std::printf("eps = %.2f:", eps);
        for (auto f : report.candidates())
            std::printf(" %lu", static_cast<unsigned long>(f));
        std::printf("\n");
    }
}
