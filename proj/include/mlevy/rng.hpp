#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (master seed, role label, level, path
// index, cell index, block counter), so a path is reproduced bit for bit no
// matter which worker thread simulates it or in which order.

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace mlevy {

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// UniformRandomBitGenerator over one (key, path, cell) counter prefix.
class CounterEngine {
  public:
    using result_type = std::uint64_t;

    CounterEngine(std::uint64_t key, std::uint64_t path, std::uint32_t cell) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
          ctr_{0u, cell, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 2) {
            out_ = Philox4x32::block(ctr_, key_);
            ++ctr_[0];
            pos_ = 0;
        }
        const result_type r = (result_type{out_[2 * pos_ + 1]} << 32) | out_[2 * pos_];
        ++pos_;
        return r;
    }

  private:
    Philox4x32::Key key_;
    Philox4x32::Counter ctr_;
    Philox4x32::Counter out_{};
    int pos_ = 2;
};

// Uniform on the open interval (0, 1); never returns an endpoint.
template <class Engine>
double uniform_open01(Engine& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

// A substream addressed by role label and level, e.g. ("path", n).
class StreamFamily {
  public:
    StreamFamily(std::uint64_t seed, std::string_view role, std::uint64_t level = 0) noexcept
        : key_(splitmix64(splitmix64(seed) ^ splitmix64(fnv1a(role)) ^ splitmix64(level + 0x632BE59BD9B4E019ull))) {}

    std::uint64_t key() const noexcept { return key_; }

  private:
    std::uint64_t key_;
};

// The random stream owned by one path (or one limit draw).
class RandomStream {
  public:
    RandomStream(const StreamFamily& family, std::uint64_t index) noexcept : key_(family.key()), index_(index) {}

    CounterEngine cell(std::uint32_t c) const noexcept { return {key_, index_, c}; }
    CounterEngine engine() const noexcept { return {key_, index_, 0xFFFFFFFFu}; }

    // Derived stream with an independent key, used for auxiliary draws
    // (marks, stable increments) that must not overlap the path draws.
    RandomStream sibling(std::string_view role) const noexcept {
        RandomStream s = *this;
        s.key_ = splitmix64(key_ ^ splitmix64(fnv1a(role)));
        return s;
    }

    std::uint64_t index() const noexcept { return index_; }

  private:
    std::uint64_t key_;
    std::uint64_t index_;
};

}  // namespace mlevy
