#include "iceload/units.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "iceload/error.hpp"

namespace iceload::units {

namespace {

struct UnitEntry {
    std::string_view name;
    Dimension dim;
    double scale;
    double divisor = 1.0;  // exact decimal submultiples divide to stay correctly rounded
};

constexpr UnitEntry kUnits[] = {
    {"m", Dimension::Length, 1.0},
    {"cm", Dimension::Length, 1.0, 100.0},
    {"mm", Dimension::Length, 1.0, 1000.0},
    {"Pa", Dimension::Pressure, 1.0},
    {"kPa", Dimension::Pressure, 1e3},
    {"MPa", Dimension::Pressure, 1e6},
    {"GPa", Dimension::Pressure, 1e9},
    {"rad", Dimension::Angle, 1.0},
    {"deg", Dimension::Angle, kPi / 180.0},
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dim) {
    const std::string_view s = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr == s.data()) {
        throw InputError("expected a number in '" + std::string(text) + "'");
    }
    const std::string_view unit = trim(s.substr(static_cast<std::size_t>(ptr - s.data())));
    if (unit.empty()) return value;
    for (const auto& u : kUnits) {
        if (u.name == unit) {
            if (u.dim != dim) {
                throw InputError("unit '" + std::string(unit) + "' has the wrong dimension in '" +
                                 std::string(text) + "'");
            }
            return value * u.scale / u.divisor;
        }
    }
    throw InputError("unknown unit '" + std::string(unit) + "'");
}

double wrap_angle(double radians) {
    double a = std::fmod(radians, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    if (a >= 2.0 * kPi) a -= 2.0 * kPi;
    return a;
}

double wrap_signed(double radians) {
    double a = wrap_angle(radians);
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

}  // namespace iceload::units
