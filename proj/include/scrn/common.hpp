/* Copyright 2026 The scrn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scrn {

// Error taxonomy. Invalid data fed to an operation is an InputError,
// inconsistent or incomplete configuration is a ConfigError, non-finite
// numerics are a NumericError, and filesystem/serialization problems are
// an IoError.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};
struct InputError : Error {
  explicit InputError(const std::string& msg) : Error(msg) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg) {}
};
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};
struct TransportError : Error {
  explicit TransportError(const std::string& msg) : Error(msg) {}
};

// Binary detection label. Human is class 0, AI is class 1 everywhere.
enum class Label : int { human = 0, ai = 1 };

inline int label_index(Label l) { return static_cast<int>(l); }
inline Label other_label(Label l) {
  return l == Label::human ? Label::ai : Label::human;
}
inline std::string label_name(Label l) {
  return l == Label::human ? "human" : "ai";
}
Label parse_label(std::string_view s);

// 64-bit FNV-1a. Used for content hashes (train/test leakage checks,
// per-text seed derivation), not for security.
uint64_t fnv1a64(std::string_view bytes);
uint64_t fnv1a64(const std::vector<int>& ids);

// Mixes two 64-bit values into one (splitmix64 finalizer over the xor).
// Used to derive sub-seeds from a named run seed plus a context value.
uint64_t mix_seed(uint64_t seed, uint64_t context);

// Deterministic PRNG (xoshiro256** seeded via splitmix64). All randomness
// in the project flows through this generator so that runs are
// reproducible byte-for-byte across platforms; std::normal_distribution is
// implementation-defined and is deliberately avoided.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  // Uniform integer in [0, n). n must be > 0.
  size_t uniform_index(size_t n);
  // Standard normal via Box-Muller (pairs cached).
  double normal();

  // Fisher-Yates shuffle with deterministic draw order.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.empty()) return;
    for (size_t i = v.size() - 1; i > 0; --i) {
      size_t j = uniform_index(i + 1);
      std::swap(v[i], v[j]);
    }
  }

 private:
  uint64_t state_[4];
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace scrn
