#include "relnet/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "relnet/errors.hpp"

namespace relnet {

int64_t Rng::uniform_below(int64_t n) {
    if (n <= 0) {
        throw ContractError("Rng::uniform_below requires n > 0");
    }
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return static_cast<int64_t>(x % un);
}

double Rng::normal(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return mean + stddev * radius * std::cos(angle);
}

uint64_t Rng::mix(uint64_t seed, uint64_t tag) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string Rng::state() const {
    std::ostringstream out;
    out << engine_;
    if (has_spare_) {
        out << " 1 " << std::hexfloat << spare_;
    } else {
        out << " 0";
    }
    return out.str();
}

void Rng::set_state(const std::string& text) {
    std::istringstream in(text);
    in >> engine_;
    int flag = 0;
    in >> flag;
    if (in.fail()) {
        throw ParseError("malformed rng state string");
    }
    has_spare_ = flag != 0;
    if (has_spare_) {
        in >> std::hexfloat >> spare_;
        if (in.fail()) {
            throw ParseError("malformed rng state string (missing spare)");
        }
    }
}

}  // namespace relnet
