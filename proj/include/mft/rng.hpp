#pragma once

#include <cstdint>

namespace mft {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Philox4x32-10 counter-based generator (Salmon et al.). A generator is
// identified by (seed, stream); substreams are cheap to derive, so every
// Monte Carlo path or model segment can own an independent stream and the
// results do not depend on how work is scheduled across threads.
//
// Satisfies UniformRandomBitGenerator; use with the <random> distributions.
class Rng {
public:
    using result_type = std::uint32_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {
        const std::uint64_t k = splitmix64(seed);
        key_[0] = static_cast<std::uint32_t>(k);
        key_[1] = static_cast<std::uint32_t>(k >> 32);
        counter_[0] = 0;
        counter_[1] = 0;
        counter_[2] = static_cast<std::uint32_t>(stream);
        counter_[3] = static_cast<std::uint32_t>(stream >> 32);
        next_ = 4;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xFFFFFFFFu; }

    result_type operator()() {
        if (next_ == 4) refill();
        return block_[next_++];
    }

    // Independent generator for the given logical sub-task. Derivation is
    // stable: it depends only on (seed, stream, id), never on draw history.
    Rng substream(std::uint64_t id) const {
        return Rng(seed_, splitmix64(stream_ ^ splitmix64(id + 0x632BE59BD9B4E019ULL)));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill() {
        std::uint32_t c0 = counter_[0], c1 = counter_[1];
        std::uint32_t c2 = counter_[2], c3 = counter_[3];
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
            const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
            const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        block_[0] = c0; block_[1] = c1; block_[2] = c2; block_[3] = c3;
        if (++counter_[0] == 0) ++counter_[1];  // 64-bit block index
        next_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint32_t key_[2];
    std::uint32_t counter_[4];
    std::uint32_t block_[4] = {0, 0, 0, 0};
    int next_;
};

}  // namespace mft
