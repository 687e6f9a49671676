// Build the single-photon phase measurement, print its schedule, and compare the
// simulated excitation probability with the closed form over one period.

#include <cstdio>

#include "qphase/protocols.hpp"

int main()
{
    qphase::SystemParams p;
    p.res.gamma = 1e-3;
    p.res.dim = 3;

    std::printf("%s\n", qphase::serialize(qphase::single_photon_schedule(10.0, p)).c_str());

    std::printf("tau      P_e simulated   P_e predicted\n");
    for (int i = 0; i <= 8; ++i) {
        const double tau = 10.0 + i * qphase::kPi / 4.0;
        const auto rec = qphase::run_protocol(qphase::single_photon_schedule(tau, p), p);
        std::printf("%-8.4f %-15.10f %.10f\n", tau, rec.p_excited,
                    qphase::predicted_pe(1, tau, p.res.gamma * tau, 1.0));
    }
}
