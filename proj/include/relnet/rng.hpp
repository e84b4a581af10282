#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace relnet {

// Deterministic random source. Wraps mt19937_64 but performs all value
// mapping (bounded ints, reals, normals, shuffles) itself so that a given
// seed yields one exact stream regardless of the standard library in use.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Unbiased integer in [0, n). n must be positive.
    int64_t uniform_below(int64_t n);

    /// Real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Box-Muller normal sample.
    double normal(double mean, double stddev);

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (int64_t i = static_cast<int64_t>(items.size()) - 1; i > 0; --i) {
            std::swap(items[static_cast<size_t>(i)],
                      items[static_cast<size_t>(uniform_below(i + 1))]);
        }
    }

    /// Derives a child seed from a parent seed and a stream tag (splitmix64).
    static uint64_t mix(uint64_t seed, uint64_t tag);

    std::string state() const;
    void set_state(const std::string& text);

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace relnet
