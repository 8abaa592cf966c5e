#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace guidelm {

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded generator with a platform-independent bounded draw.
/// std::uniform_int_distribution and std::shuffle are implementation-defined, so sampling and
/// blinding use this instead to keep outputs identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace guidelm
