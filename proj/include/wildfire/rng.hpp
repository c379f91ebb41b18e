#pragma once

#include <cstdint>
#include <initializer_list>

namespace wildfire {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Folds a sequence of words into one key. Order matters.
constexpr std::uint64_t hash_key(std::initializer_list<std::uint64_t> words) noexcept
{
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto w : words) {
        h = mix64(h ^ mix64(w));
    }
    return h;
}

// Maps the top 53 bits to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based uniform draw: a pure function of its key words, so draws can
// be evaluated in any order or on any thread.
constexpr double keyed_uniform(std::initializer_list<std::uint64_t> words) noexcept
{
    return to_unit(hash_key(words));
}

// Sequential stream over a counter-based generator. Splitting derives an
// independent stream from (key, salt) without touching this one.
class CounterRng
{
  public:
    constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next_u64() noexcept { return hash_key({key_, counter_++}); }

    constexpr double next_unit() noexcept { return to_unit(next_u64()); }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) noexcept
    {
        // Lemire's multiply-shift; bias is below 2^-64 * bound for our sizes.
        const auto product = static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<std::uint64_t>(product >> 64);
    }

    constexpr CounterRng split(std::uint64_t salt) const noexcept
    {
        return CounterRng(hash_key({key_, 0x5eedULL, salt}));
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace wildfire
