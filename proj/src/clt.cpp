#include "exclusion/clt.hpp"

#include <algorithm>

namespace exclusion {

CltConstants clt_constants_two_particle(const RateSystem& rates) {
    if (rates.gaps() != 1) {
        throw ModelError("two-particle constants need exactly two particles");
    }
    const double a1 = rates.a(1), a2 = rates.a(2), b1 = rates.b(1), b2 = rates.b(2);
    if (!(a1 + b2 < a2 + b1)) {
        throw ModelError("two-particle system is not a stable cloud (a1 + b2 >= a2 + b1)");
    }
    return {(b1 * b2 - a1 * a2) / (a2 + b1), (a1 * a2 + b1 * b2) / (a2 + b1)};
}

bool is_single_cloud(const RateSystem& rates) {
    const auto loads = hrho_all(rates, {1, static_cast<int>(rates.particles())});
    return std::all_of(loads.begin(), loads.end(), [](double r) { return r < 1.0; });
}

double excursion_rate(const RateSystem& rates) {
    const auto loads = hrho_all(rates, {1, static_cast<int>(rates.particles())});
    double empty_mass = 1.0;
    for (double r : loads) {
        if (!(r < 1.0)) {
            throw ModelError("excursion rate is only defined for a single stable cloud");
        }
        empty_mass *= 1.0 - r;
    }
    return (rates.a(1) + rates.b(rates.particles())) * empty_mass;
}

}  // namespace exclusion
