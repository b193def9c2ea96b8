#include "nrcid/random.hpp"

#include <numeric>
#include <stdexcept>
#include <utility>

namespace nrcid {

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    return sample_without_replacement(n, n, rng);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    if (k > n) {
        throw std::invalid_argument("cannot sample more items than available");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates with rejection sampling of each index.
    for (std::size_t i = 0; i < k; ++i) {
        const std::uint64_t span = n - i;
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % span + 1) % span;
        std::uint64_t r;
        do {
            r = rng();
        } while (r > limit);
        std::swap(idx[i], idx[i + static_cast<std::size_t>(r % span)]);
    }
    idx.resize(k);
    return idx;
}

} // namespace nrcid
