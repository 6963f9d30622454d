// Copyright 2026 The Instructkit Authors.
//
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

#ifndef INSTRUCTKIT_RANDOM_H_
#define INSTRUCTKIT_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace instructkit {

// Portable deterministic RNG. std::mt19937_64 and std::seed_seq are fully
// specified by the standard; the distributions are not, so index sampling
// and shuffling are done here rather than through <random> distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Independent stream keyed by (seed, stream...).
  static Rng Derive(uint64_t seed, std::initializer_list<uint64_t> stream) {
    std::vector<uint32_t> words;
    words.push_back(static_cast<uint32_t>(seed));
    words.push_back(static_cast<uint32_t>(seed >> 32));
    for (uint64_t s : stream) {
      words.push_back(static_cast<uint32_t>(s));
      words.push_back(static_cast<uint32_t>(s >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(std::mt19937_64(seq));
  }

  uint64_t Next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  size_t UniformIndex(size_t n) {
    const uint64_t range = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<size_t>(x % range);
  }

  // Uniform in [0, 1).
  double UniformUnit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[UniformIndex(i)]);
    }
  }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    Shuffle(std::span<T>(items));
  }

  // `k` distinct indices drawn uniformly from [0, n), in draw order.
  std::vector<size_t> SampleIndices(size_t n, size_t k) {
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    for (size_t i = 0; i < k && i < n; ++i) {
      std::swap(pool[i], pool[i + UniformIndex(n - i)]);
    }
    pool.resize(k < n ? k : n);
    return pool;
  }

 private:
  explicit Rng(std::mt19937_64 engine) : engine_(engine) {}

  std::mt19937_64 engine_;
};

}  // namespace instructkit

#endif  // INSTRUCTKIT_RANDOM_H_
