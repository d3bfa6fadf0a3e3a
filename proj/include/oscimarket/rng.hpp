#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace oscimarket {

// Philox4x32-10 counter-based block cipher. Stateless: every 128-bit counter
// maps to four independent 32-bit words under a 64-bit key, so increments can
// be generated in any order (per path, per step) with identical results.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Deterministic stream of N(0,1) increments addressed by (step, slot).
// Same (master_seed, path_index) always reproduces the same sequence;
// distinct path indices give statistically independent streams.
class NoiseStream {
public:
    NoiseStream(std::uint64_t master_seed, std::uint64_t path_index, int dimension = 1);

    // Standard normal draw for the given step and slot (slot < 2^31).
    double gaussian(std::uint64_t step, std::uint32_t slot) const;

    // Fills out[0..k) with the step's increments (slots 0..k-1).
    void fill_gaussian(std::uint64_t step, std::span<double> out) const;

    // Uniform draw in [0,1) for the given step/slot (used for e.g. phases).
    double uniform(std::uint64_t step, std::uint32_t slot) const;

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t path_index() const { return path_index_; }
    int dimension() const { return dimension_; }

private:
    std::uint64_t master_seed_;
    std::uint64_t path_index_;
    int dimension_;
    std::array<std::uint32_t, 2> key_;
};

} // namespace oscimarket
