// Copyright 2026 The fpmon Authors.
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

#pragma once

// Estimator formulas that turn moment / distinct-count values into answers for
// the composed problems, and the Gaussian l2 -> lp embedding.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fpmon/core.hpp"
#include "fpmon/hardgen.hpp"
#include "fpmon/random.hpp"

namespace fpmon {

/// F_p of all k sites (w0), of the first k/2 sites (w1) and of the rest (w2).
struct MomentTriple {
  double w0 = 0, w1 = 0, w2 = 0;
};

/// Exact triple for a BTX instance, items keyed by (block, column).
inline MomentTriple btx_moments(const BtxInstance& inst, double p) {
  const std::uint64_t m = inst.universe();
  std::vector<Count> all(m, 0), low(m, 0), high(m, 0);
  for (std::uint32_t i = 0; i < inst.k; ++i) {
    auto& half = i < inst.k / 2 ? low : high;
    for (std::uint64_t b = 0; b < inst.blocks; ++b) {
      for (std::uint64_t c = 0; c < inst.n; ++c) {
        if (!inst.bit(b, i, c)) continue;
        ++all[b * inst.n + c];
        ++half[b * inst.n + c];
      }
    }
  }
  return {moment_of_counts(all, p), moment_of_counts(low, p), moment_of_counts(high, p)};
}

/// (2^{p-1}(w1 + w2) - w0) / (2^{p-1} - 1)
inline double btx_combined_moment(const MomentTriple& t, double p) {
  if (!(p > 1)) throw std::invalid_argument("btx_from_moments: p must exceed 1");
  const double h = std::pow(2.0, p - 1);
  return (h * (t.w1 + t.w2) - t.w0) / (h - 1);
}

/// 1 iff |2^p W/k^p - (2^p+1)/(2 eps^2)| >= 1.5/eps, with 1/eps^2 and 1/eps
/// rounded as in gen_btx.
inline int btx_from_moments(const MomentTriple& t, std::uint32_t k, double p, double eps) {
  const double w = btx_combined_moment(t, p);
  const double inv_eps2 = static_cast<double>(std::llround(1.0 / (eps * eps)));
  const double inv_eps = static_cast<double>(std::llround(1.0 / eps));
  const double two_p = std::pow(2.0, p);
  const double scaled = two_p * w / std::pow(static_cast<double>(k), p);
  return std::abs(scaled - (two_p + 1) * inv_eps2 / 2) >= 1.5 * inv_eps ? 1 : 0;
}

/// (W - (n' - l')) / (1 - lambda): estimate of the number of intersecting sites.
inline double bit_from_f0(double w_tilde, std::uint64_t nprime, std::uint64_t lprime,
                          double lambda) {
  if (!(lambda >= 0 && lambda < 1)) throw std::invalid_argument("bit_from_f0: lambda must lie in [0,1)");
  return (w_tilde - (static_cast<double>(nprime) - static_cast<double>(lprime))) / (1 - lambda);
}

/// Expected number of occupied bins after n balls go into l bins uniformly.
inline double expected_distinct(std::uint64_t n, std::uint64_t l) {
  if (l == 0) throw std::invalid_argument("expected_distinct: need at least one bin");
  if (n == 0) return 0.0;
  const double ld = static_cast<double>(l);
  // l (1 - (1 - 1/l)^n), with expm1/log1p to keep precision for large l.
  return -ld * std::expm1(static_cast<double>(n) * std::log1p(-1.0 / ld));
}

/// lambda with expected_distinct(n, l) = (1 - lambda) n.
inline double distinct_lambda(std::uint64_t n, std::uint64_t l) {
  if (n == 0) throw std::invalid_argument("distinct_lambda: n must be positive");
  return 1.0 - expected_distinct(n, l) / static_cast<double>(n);
}

/// Occupied bins after throwing n balls into l bins.
inline std::uint64_t simulate_bin_ball(std::uint64_t n, std::uint64_t l, Rng& rng) {
  std::vector<bool> hit(l, false);
  std::uint64_t occupied = 0;
  for (std::uint64_t b = 0; b < n; ++b) {
    const auto bin = rng.below(l);
    if (!hit[bin]) {
      hit[bin] = true;
      ++occupied;
    }
  }
  return occupied;
}

/// Distinct elements of the union of the site sets.
inline std::uint64_t union_f0(const BitDisjInstance& inst) {
  std::vector<bool> seen(inst.nprime, false);
  std::uint64_t count = 0;
  for (const auto& xi : inst.x) {
    for (const auto v : xi) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
      }
    }
  }
  return count;
}

/// E|N(0,1)|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
inline double gp_moment(double p) {
  if (!(p > 0)) throw std::invalid_argument("gp_moment: p must be positive");
  return std::pow(2.0, p / 2) * std::tgamma((p + 1) / 2) / std::sqrt(std::numbers::pi);
}

/// y_j = <v^j, x> / G_p^{1/p} with v^j i.i.d. standard normal vectors drawn
/// row by row from Rng(seed).
inline std::vector<double> gaussian_embed(const std::vector<std::int64_t>& x, std::uint32_t r,
                                          double p, std::uint64_t seed) {
  if (r == 0) throw std::invalid_argument("gaussian_embed: r must be >= 1");
  const double scale = std::pow(gp_moment(p), 1.0 / p);
  Rng rng(seed);
  std::vector<double> y(r, 0.0);
  for (auto& yj : y) {
    double dot = 0;
    for (const auto xi : x) dot += rng.normal() * static_cast<double>(xi);
    yj = dot / scale;
  }
  return y;
}

/// (1/r) sum |y_j|^p, which estimates ||x||_2^p.
inline double embedded_moment(const std::vector<double>& y, double p) {
  if (y.empty()) throw std::invalid_argument("embedded_moment: empty sketch");
  double sum = 0;
  for (const auto v : y) sum += std::pow(std::abs(v), p);
  return sum / static_cast<double>(y.size());
}

inline double l2_norm(const std::vector<std::int64_t>& x) {
  double sum = 0;
  for (const auto v : x) sum += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(sum);
}

}  // namespace fpmon
