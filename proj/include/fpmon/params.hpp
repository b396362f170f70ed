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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fpmon/random.hpp"
#include "fpmon/sampling.hpp"

namespace fpmon {

/// How the coordinator scales an arriving (j, z, l) tuple.
enum class IncrementPolicy {
  // tau_l^{1/p}/B divided by the send probability min(B/tau_l^{1/p}, 1),
  // i.e. max(tau_l^{1/p}/B, 1). Unbiased for v_j at every level.
  inverse_probability,
  // tau_l^{1/p}/B regardless of the send probability.
  literal,
};

inline const char* to_string(IncrementPolicy policy) {
  return policy == IncrementPolicy::literal ? "literal" : "inverse_probability";
}

inline IncrementPolicy parse_increment_policy(const std::string& s) {
  if (s == "literal") return IncrementPolicy::literal;
  if (s == "inverse_probability" || s == "inverse-probability") {
    return IncrementPolicy::inverse_probability;
  }
  throw std::invalid_argument("unknown increment policy '" + s + "'");
}

/// Tunable constants behind the asymptotic parameter choices.
struct Constants {
  double c_gamma = 0.1;  // gamma = c_gamma * eps
  double c_B = 1.0;      // B = max(8, c_B * eps^-3 * ceil(log2 n)^2)
  double c_r = 5.0;      // r = c_r * ceil(log2 n)
  double C = 8.0;        // concentration constant, diagnostics only
  // Coordinator fires once its estimate exceeds fire_fraction * tau.
  // Non-positive selects 1/sqrt(1+eps), the geometric middle of the
  // don't-care band [tau/(1+eps), tau]. 1-eps gives the original rule.
  double fire_fraction = 0.0;
  IncrementPolicy increment = IncrementPolicy::inverse_probability;
};

/// All protocol constants, shared read-only by sites and coordinator.
struct GlobalParams {
  std::uint32_t k = 1;
  std::uint64_t m = 1;
  std::uint64_t n = 1;
  double p = 2.0;
  double eps = 0.1;
  double tau = 1.0;
  double gamma = 0.01;
  double B = 8.0;
  std::uint32_t r = 1;
  double C = 8.0;
  Level max_level = 0;
  double fire_fraction = 1.0;
  IncrementPolicy increment = IncrementPolicy::inverse_probability;
  Constants constants;

  static GlobalParams make(std::uint32_t k, std::uint64_t m, std::uint64_t n, double p,
                           double eps, double tau, const Constants& c = {}) {
    GlobalParams g;
    g.k = k;
    g.m = m;
    g.n = n;
    g.p = p;
    g.eps = eps;
    g.tau = tau;
    g.constants = c;
    const double log_n = ceil_log2(n);
    g.gamma = c.c_gamma * eps;
    g.B = std::max(8.0, c.c_B * std::pow(eps, -3.0) * log_n * log_n);
    g.r = static_cast<std::uint32_t>(std::max(1.0, std::round(c.c_r * log_n)));
    g.C = c.C;
    g.max_level = ceil_log2(m);
    g.fire_fraction = c.fire_fraction > 0 ? c.fire_fraction : 1.0 / std::sqrt(1.0 + eps);
    g.increment = c.increment;
    g.validate();
    return g;
  }

  GlobalParams with_tau(double new_tau) const {
    GlobalParams g = *this;
    g.tau = new_tau;
    g.validate();
    return g;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("GlobalParams: " + what); };
    if (k == 0 || !std::has_single_bit(k)) fail("k must be a power of 2, got " + std::to_string(k));
    if (m == 0) fail("m must be positive");
    if (n == 0) fail("n must be positive");
    if (!(p > 1)) fail("p must exceed 1");
    if (!(eps > 0 && eps < 1)) fail("eps must lie in (0,1)");
    if (!(tau >= 1)) fail("tau must be >= 1");
    if (!(gamma > 0 && gamma < 1)) fail("gamma must lie in (0,1)");
    if (!(B >= 1)) fail("B must be >= 1");
    if (r == 0) fail("r must be >= 1");
    if (!(fire_fraction > 0)) fail("fire fraction must be positive");
  }

  double tau_level(Level l) const { return std::ldexp(tau, -l); }
  // tau_l^{1/p}
  double level_scale(Level l) const { return std::pow(tau_level(l), 1.0 / p); }
  double send_probability(Level l) const { return std::min(B / level_scale(l), 1.0); }
  double send_guard(Level l) const { return level_scale(l) / (static_cast<double>(k) * B); }
  double increment_for(Level l) const {
    const double literal = level_scale(l) / B;
    return increment == IncrementPolicy::literal ? literal : std::max(literal, 1.0);
  }
  int levels() const { return max_level + 1; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "k=" << k << " m=" << m << " n=" << n << " p=" << p << " eps=" << eps
       << " tau=" << tau << " gamma=" << gamma << " B=" << B << " r=" << r << " C=" << C
       << " max_level=" << max_level << " fire_fraction=" << fire_fraction
       << " increment=" << to_string(increment);
    return os.str();
  }
};

/// Seeds of one protocol instance: public coin, coordinator's eta, and the
/// sites' Bernoulli trials.
struct ProtocolSeeds {
  std::uint64_t coin = 0;
  std::uint64_t eta = 0;
  std::uint64_t site = 0;

  static ProtocolSeeds derive(std::uint64_t master, std::uint64_t instance = 0,
                              std::uint64_t copy = 0) {
    return {hash_words(master, 0xc011, instance, copy), hash_words(master, 0xe7a, instance, copy),
            hash_words(master, 0x517e, instance, copy)};
  }

  friend bool operator==(const ProtocolSeeds&, const ProtocolSeeds&) = default;
};

}  // namespace fpmon
