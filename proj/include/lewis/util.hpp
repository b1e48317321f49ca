// Copyright 2026 The Lewis Authors. All Rights Reserved.
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

#ifndef LEWIS_UTIL_HPP_
#define LEWIS_UTIL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace lewis {

// Portable random source. The engine is fully specified by the standard;
// the distributions are implemented here so draws are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n), rejection-sampled.
  std::size_t index(std::size_t n);

  // Standard normal via Box-Muller.
  double normal();

  // Geometric on {1, 2, ...} with success probability p.
  std::size_t geometric(double p);

  template <typename Seq>
  void shuffle(Seq& seq) {
    for (std::size_t i = seq.size(); i > 1; --i) {
      std::swap(seq[i - 1], seq[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> tags);

// 64-bit FNV-1a, stable across platforms; rendered as 16 hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Logging to stderr; silenced when the level is above the threshold.
enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kSilent = 3 };
void set_log_level(LogLevel level);
void log_info(const std::string& message);
void log_warning(const std::string& message);

// Runs fn(i) for i in [0, n) over `workers` threads using a fixed static
// partition, so results written by index are independent of scheduling.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace lewis

#endif  // LEWIS_UTIL_HPP_
