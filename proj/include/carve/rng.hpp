// Copyright 2026 The Carve Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CARVE_RNG_HPP_
#define CARVE_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace carve {

// Deterministic generator used everywhere randomness is needed. The engine is
// std::mt19937_64 (bit-exact across platforms); bounded sampling is done by
// rejection on raw 64-bit draws rather than std distributions, whose outputs
// vary between standard library implementations.
class SeededRng {
  public:
    explicit SeededRng(uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return engine_(); }

    // Uniform integer in [lo, hi], inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        if (lo >= hi) return lo;
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return lo + static_cast<int64_t>(draw % span);
    }

    // Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values sampled from `pool` (partial Fisher-Yates); order of
    // selection is preserved. k >= pool.size() returns the whole pool shuffled.
    std::vector<int> sample(std::vector<int> pool, size_t k) {
        if (k > pool.size()) k = pool.size();
        std::vector<int> out;
        out.reserve(k);
        for (size_t i = 0; i < k; ++i) {
            const size_t j =
                i + static_cast<size_t>(uniform_int(0, static_cast<int64_t>(pool.size() - i) - 1));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

  private:
    uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace carve

#endif  // CARVE_RNG_HPP_
