#include "oscimarket/rng.hpp"

#include <cmath>
#include <numbers>

namespace oscimarket {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * ctr[2];
    const std::array<std::uint32_t, 4> next = {
        std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0],
        std::uint32_t(p1),
        std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
        std::uint32_t(p0),
    };
    ctr = next;
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        philox_round(counter, key);
    }
    return counter;
}

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint64_t path_index, int dimension)
    : master_seed_(master_seed), path_index_(path_index), dimension_(dimension) {
    const std::uint64_t k = splitmix64(splitmix64(master_seed) ^ splitmix64(path_index + 0x517CC1B727220A95ull));
    key_ = {std::uint32_t(k), std::uint32_t(k >> 32)};
}

double NoiseStream::gaussian(std::uint64_t step, std::uint32_t slot) const {
    const std::uint32_t pair = slot >> 1;
    const std::array<std::uint32_t, 4> ctr = {pair, std::uint32_t(step), std::uint32_t(step >> 32),
                                              0x6F73636Du};
    const auto words = philox4x32(ctr, key_);
    // Box-Muller on the block's first two words; u1 in (0,1], u2 in (0,1).
    const double u1 = (double(words[0]) + 1.0) * 0x1p-32;
    const double u2 = (double(words[1]) + 0.5) * 0x1p-32;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (slot & 1u) ? radius * std::sin(angle) : radius * std::cos(angle);
}

void NoiseStream::fill_gaussian(std::uint64_t step, std::span<double> out) const {
    for (std::uint32_t pair = 0; 2 * pair < out.size(); ++pair) {
        const std::array<std::uint32_t, 4> ctr = {pair, std::uint32_t(step), std::uint32_t(step >> 32),
                                                  0x6F73636Du};
        const auto words = philox4x32(ctr, key_);
        const double u1 = (double(words[0]) + 1.0) * 0x1p-32;
        const double u2 = (double(words[1]) + 0.5) * 0x1p-32;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[2 * pair] = radius * std::cos(angle);
        if (2 * pair + 1 < out.size()) {
            out[2 * pair + 1] = radius * std::sin(angle);
        }
    }
}

double NoiseStream::uniform(std::uint64_t step, std::uint32_t slot) const {
    const std::array<std::uint32_t, 4> ctr = {slot, std::uint32_t(step), std::uint32_t(step >> 32),
                                              0x756E6966u};
    const auto words = philox4x32(ctr, key_);
    return double(words[0]) * 0x1p-32;
}

} // namespace oscimarket
