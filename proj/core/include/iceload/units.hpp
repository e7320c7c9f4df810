#pragma once

#include <string_view>

namespace iceload::units {

enum class Dimension { Length, Pressure, Angle, Dimensionless };

// Parses "<number>[ <unit>]" into SI (m, Pa, rad). A bare number is taken as
// already being in SI. Throws InputError on an unknown or mismatched unit.
double parse_quantity(std::string_view text, Dimension dim);

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg(double degrees) { return degrees * kPi / 180.0; }
constexpr double to_deg(double radians) { return radians * 180.0 / kPi; }

// Wraps an angle into [0, 2*pi).
double wrap_angle(double radians);
// Wraps an angle into (-pi, pi].
double wrap_signed(double radians);

}  // namespace iceload::units
