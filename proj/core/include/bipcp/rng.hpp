#pragma once

#include <cstdint>
#include <limits>

namespace bipcp {

// Counter-based generator: output j of stream (key) is mix(key, j).
// Streams derived from (master_seed, trial_index) give results independent of
// execution order and worker count.
namespace rng {

inline std::uint64_t mix(std::uint64_t key, std::uint64_t ctr) {
    std::uint64_t z = key + 0x9e3779b97f4a7c15ULL * (ctr + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return mix(mix(master, a) ^ 0xd1342543de82ef95ULL, b);
}

}  // namespace rng

// Satisfies UniformRandomBitGenerator, so std:: distributions work on top.
class Stream {
   public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t key) : key_(key), ctr_(0) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return rng::mix(key_, ctr_++); }

    // uniform on (0,1]: zero excluded so marks and log() stay finite
    double uniform01() {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1p-53;
    }

    std::uint64_t key() const { return key_; }

   private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

}  // namespace bipcp
