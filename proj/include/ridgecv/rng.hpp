#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ridgecv {

// Splittable random stream: a master seed plus an integer path.
// Identical (seed, path) pairs reproduce identical draws; sibling paths give
// independent streams, so parallel trials can each own one without shared
// state. Derivation is a splitmix64 chain over seed and path components.
class RngStream {
  public:
    explicit RngStream(std::uint64_t master_seed)
        : master_(master_seed), mixed_(mix(0x9e3779b97f4a7c15ULL, master_seed)) {}

    RngStream fork(std::uint64_t id) const {
        RngStream child(*this);
        child.path_.push_back(id);
        child.mixed_ = mix(child.mixed_, id);
        return child;
    }

    std::mt19937_64 engine() const { return std::mt19937_64(mixed_); }

    std::uint64_t master_seed() const { return master_; }
    const std::vector<std::uint64_t>& path() const { return path_; }
    std::uint64_t state() const { return mixed_; }

    static std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
        std::uint64_t z = h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t master_;
    std::vector<std::uint64_t> path_;
    std::uint64_t mixed_;
};

}  // namespace ridgecv
