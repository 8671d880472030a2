#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace augbench {

// Error classes map onto CLI exit codes: usage = 1, data = 2, provider = 3.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ProviderError : std::runtime_error {
    explicit ProviderError(const std::string& msg) : std::runtime_error(msg) {}
};

// 64-bit FNV-1a. Used for cheap token hashing and seed derivation, not caching.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic RNG with explicitly specified draw algorithms, so identical
// seeds give identical streams on every standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, n) via rejection sampling; n must be > 0.
    std::uint64_t next_below(std::uint64_t n);
    // Uniform in [0, 1) with 53 random bits.
    double next_double();
    // Standard normal via Box-Muller.
    double next_gaussian();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    // Independent child stream; mixing is order-sensitive in `stream`.
    Rng derive(std::string_view stream) const;
    Rng derive(std::uint64_t stream) const;

private:
    std::uint64_t state_[4];
    double spare_gaussian_ = 0.0;
    bool has_spare_ = false;
    std::uint64_t seed_;
};

// String helpers.
std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower_ascii(std::string_view s);

// Fixed-decimal formatting for reports ("%.*f").
std::string format_fixed(double v, int decimals);

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; any
// shared reduction must write to per-index slots and be combined in index
// order by the caller so results do not depend on thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace augbench
