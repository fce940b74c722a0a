#pragma once

namespace rydar {

inline constexpr double speed_of_light = 299792458.0;  // m/s, exact by definition
inline constexpr double hbar_si = 1.054571817e-34;     // J*s, 2018 CODATA
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}
