#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace muda::rng {

/// splitmix64 step; used to mix seed material, never as the main generator.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives an independent stream seed from a base seed and a role tag.
/// Distinct tags (and extras) give unrelated streams, so the market split,
/// the per-side lotteries and the experiment repetitions never share draws.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    return splitmix64(splitmix64(base) ^ fnv1a(tag));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t a) {
    return splitmix64(derive_seed(base, tag) ^ splitmix64(a));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t a,
                                    std::uint64_t b) {
    return splitmix64(derive_seed(base, tag, a) ^ splitmix64(~b));
}

/// Deterministic random stream.
///
/// Wraps std::mt19937_64 (whose output sequence the standard pins down) and
/// draws bounded values by rejection instead of std::uniform_int_distribution,
/// whose mapping is implementation-defined. Identical seeds therefore give
/// identical draws on every platform, which golden-file tests rely on.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Unbiased draw from [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * (~std::uint64_t{0} / n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Inclusive integer range.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool coin() { return (engine_() & 1) != 0; }

    /// Fisher-Yates with rejection-sampled indices.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace muda::rng
