#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace aop {

/// Counter-based generator: the n-th output is a pure function of (key, n).
/// Streams are derived with split(), so the numbers a consumer sees never
/// depend on how many draws other consumers made.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key = 0) : key_(mix(key)) {}

    /// Key derived from an ordered tuple of identifiers.
    static CounterRng from_ids(std::initializer_list<std::uint64_t> ids) {
        std::uint64_t k = 0x6a09e667f3bcc908ULL;
        for (auto id : ids) {
            k = mix(k ^ mix(id + 0x9e3779b97f4a7c15ULL));
        }
        return CounterRng(k);
    }

    /// Independent child stream; does not advance this generator.
    [[nodiscard]] CounterRng split(std::uint64_t stream) const {
        CounterRng child;
        child.key_ = mix(key_ ^ mix(stream * 0xd1b54a32d192ed03ULL + 1));
        return child;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        return mix(key_ + 0x9e3779b97f4a7c15ULL * (++counter_));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    // SplitMix64 finalizer.
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace aop
