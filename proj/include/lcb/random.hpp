// Copyright 2026 The LCB Authors. All rights reserved.
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

#ifndef LCB_RANDOM_HPP_
#define LCB_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace lcb {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a stream tag
// (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

double sample_uniform(Rng& rng);

// Gamma(shape, rate); mean shape / rate.
double sample_gamma(Rng& rng, double shape, double rate);

double sample_beta(Rng& rng, double a, double b);

// Draws an index from non-negative weights (need not be normalized).
std::size_t sample_categorical(Rng& rng, std::span<const double> weights);

// Draws an index from unnormalized log weights, normalizing in log space.
std::size_t sample_log_categorical(Rng& rng, std::span<const double> log_weights);

// log(sum(exp(v))) with max subtraction.
double log_sum_exp(std::span<const double> values);

}  // namespace lcb

#endif  // LCB_RANDOM_HPP_
