#include "gdm/viscosity.hpp"

#include <cmath>
#include <stdexcept>

namespace gdm {

ViscosityModel ViscosityModel::constant(double c)
{
    if (!(c > 0.0))
        throw std::invalid_argument("constant viscosity must be positive");
    return {"constant", [c](double) { return c; }, [](double) { return 0.0; }, c, c};
}

ViscosityModel ViscosityModel::sqrt_coupled(double range)
{
    if (!(range > 0.0))
        throw std::invalid_argument("viscosity sampling range must be positive");
    return {"sqrt_coupled",
            [](double s) { return std::sqrt(s * s + 1.0) + 2.0; },
            [](double s) { return s / std::sqrt(s * s + 1.0); },
            3.0,
            std::sqrt(range * range + 1.0) + 2.0};
}

} // namespace gdm
