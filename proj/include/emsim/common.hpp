#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace emsim {

// ---------------------------------------------------------------------------
// Error categories
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LookupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LocationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoPathError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Identifiers and geometry
// ---------------------------------------------------------------------------

struct RoomId {
    int value = -1;

    constexpr RoomId() = default;
    constexpr explicit RoomId(int v) : value(v) {}

    constexpr bool valid() const { return value >= 0; }
    constexpr std::size_t index() const { return static_cast<std::size_t>(value); }

    auto operator<=>(const RoomId&) const = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

inline constexpr double kPi = 3.14159265358979323846;

// Angles are world-frame degrees: east = 0, counterclockwise positive.
inline double wrap_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    if (w >= 360.0) w -= 360.0;
    return w;
}

// Signed difference target - from, in (-180, 180].
inline double angle_diff(double target, double from) {
    double d = wrap_degrees(target - from);
    return d > 180.0 ? d - 360.0 : d;
}

inline double bearing_between(Point from, Point to) {
    return wrap_degrees(std::atan2(to.y - from.y, to.x - from.x) * 180.0 / kPi);
}

// ---------------------------------------------------------------------------
// Per-room probability vector indexed by RoomId.
// ---------------------------------------------------------------------------

inline constexpr double kNormTolerance = 1e-9;

class RoomDistribution {
public:
    RoomDistribution() = default;
    explicit RoomDistribution(std::vector<double> values) : p_(std::move(values)) {}

    static RoomDistribution uniform(std::size_t n) {
        if (n == 0) throw ConfigError("uniform distribution over zero rooms");
        return RoomDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    // Scales to unit mass. Throws ConfigError on negative, non-finite or zero total mass.
    static RoomDistribution normalized(std::vector<double> values) {
        double total = 0.0;
        for (double v : values) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("distribution entry must be finite and >= 0");
            total += v;
        }
        if (!(total > 0.0)) throw ConfigError("distribution has zero total mass");
        for (double& v : values) v /= total;
        return RoomDistribution(std::move(values));
    }

    double operator[](RoomId r) const { return p_.at(r.index()); }
    double& operator[](RoomId r) { return p_.at(r.index()); }

    std::size_t size() const { return p_.size(); }
    bool empty() const { return p_.empty(); }
    std::span<const double> values() const { return p_; }
    const std::vector<double>& vec() const& { return p_; }
    std::vector<double> vec() && { return std::move(p_); }

    double sum() const {
        double s = 0.0;
        for (double v : p_) s += v;
        return s;
    }

    bool is_normalized(double tol = kNormTolerance) const {
        for (double v : p_)
            if (v < 0.0 || !std::isfinite(v)) return false;
        return !p_.empty() && std::abs(sum() - 1.0) <= tol;
    }

    bool operator==(const RoomDistribution&) const = default;

private:
    std::vector<double> p_;
};

// ---------------------------------------------------------------------------
// Emergency taxonomy shared by acoustics, identify and agent.
// ---------------------------------------------------------------------------

enum class EmergencyKind { Fall, Fire };

std::string to_string(EmergencyKind k);
EmergencyKind emergency_kind_from_string(const std::string& s);

// splitmix64 finalizer; used to derive independent sub-seeds from one episode seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace emsim
