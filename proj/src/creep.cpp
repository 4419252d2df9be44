#include "tsa/creep.hpp"

#include <cmath>
#include <stdexcept>

namespace tsa {

double SaturatingCreep::operator()(double cycles) const {
    if (std::isinf(saturation)) return rate * cycles;
    if (saturation == 0.0) return 0.0;
    return saturation * -std::expm1(-rate * cycles / saturation);
}

double SaturatingCreep::cycles_to_fraction(double fraction) const {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("creep fraction must lie in (0, 1)");
    }
    if (std::isinf(saturation) || !(rate > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return -saturation / rate * std::log1p(-fraction);
}

SaturatingCreep SaturatingCreep::reaching(double saturation, double horizon_cycles,
                                          double fraction) {
    if (!(saturation >= 0.0) || std::isinf(saturation) || !(horizon_cycles > 0.0)) {
        throw std::invalid_argument("creep horizon needs a finite saturation and a positive horizon");
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("creep fraction must lie in (0, 1)");
    }
    return SaturatingCreep{-saturation * std::log1p(-fraction) / horizon_cycles, saturation};
}

}  // namespace tsa
