#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace dcbsim {

// Simulated time as a fixed-point count of microseconds. Integer arithmetic
// keeps event ordering identical across runs; there is no floating
// accumulation anywhere on the clock path.
class SimTime {
public:
    constexpr SimTime() = default;

    static constexpr SimTime from_us(std::int64_t us) { return SimTime(us); }

    static SimTime from_seconds(double s) {
        return SimTime(static_cast<std::int64_t>(std::llround(s * 1e6)));
    }

    constexpr std::int64_t us() const { return us_; }
    double seconds() const { return static_cast<double>(us_) / 1e6; }

    constexpr SimTime operator+(std::int64_t delta_us) const { return SimTime(us_ + delta_us); }
    constexpr SimTime operator-(std::int64_t delta_us) const { return SimTime(us_ - delta_us); }
    constexpr std::int64_t operator-(SimTime other) const { return us_ - other.us_; }

    constexpr auto operator<=>(const SimTime&) const = default;

    static constexpr SimTime max() {
        return SimTime(std::numeric_limits<std::int64_t>::max());
    }

private:
    constexpr explicit SimTime(std::int64_t us) : us_(us) {}
    std::int64_t us_ = 0;
};

constexpr std::int64_t kUsPerSecond = 1'000'000;

constexpr std::int64_t seconds_to_us(std::int64_t s) { return s * kUsPerSecond; }

inline std::int64_t seconds_to_us(double s) {
    return static_cast<std::int64_t>(std::llround(s * 1e6));
}

} // namespace dcbsim
