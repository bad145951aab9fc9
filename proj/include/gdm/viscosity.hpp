#pragma once

#include <functional>
#include <string>

namespace gdm {

/// Temperature-dependent viscosity V(S) with declared bounds a1 <= V <= a2.
struct ViscosityModel {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    double lower = 1.0; // a1
    double upper = 1.0; // a2

    double operator()(double s) const { return value(s); }

    /// V == c.
    static ViscosityModel constant(double c = 1.0);

    /// V(S) = sqrt(S^2 + 1) + 2. The upper bound is declared over |S| <= range.
    static ViscosityModel sqrt_coupled(double range = 10.0);
};

} // namespace gdm
