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

// Synthetic insertion streams and their text format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpmon/core.hpp"
#include "fpmon/random.hpp"

namespace fpmon {

struct StreamEvent {
  std::uint64_t t = 0;
  std::uint32_t site = 0;
  Coordinate j = 0;

  friend bool operator==(const StreamEvent&, const StreamEvent&) = default;
};

struct Stream {
  std::uint64_t m = 1;
  std::uint32_t k = 1;
  std::uint64_t n = 0;  // declared length bound
  std::vector<StreamEvent> events;

  friend bool operator==(const Stream&, const Stream&) = default;
};

/// Throws std::invalid_argument naming the first offending event.
inline void validate_stream(const Stream& s) {
  if (s.m == 0 || s.k == 0) throw std::invalid_argument("stream: m and k must be positive");
  if (s.events.size() > s.n) {
    throw std::invalid_argument("stream: " + std::to_string(s.events.size()) +
                                " events exceed declared length " + std::to_string(s.n));
  }
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    std::string problem;
    if (e.t != i) {
      problem = "t=" + std::to_string(e.t) + " out of order";
    } else if (e.site >= s.k) {
      problem = "site " + std::to_string(e.site) + " >= k=" + std::to_string(s.k);
    } else if (e.j >= s.m) {
      problem = "coordinate " + std::to_string(e.j) + " >= m=" + std::to_string(s.m);
    }
    if (!problem.empty()) {
      throw std::invalid_argument("stream: malformed event at position " + std::to_string(i) +
                                  ": " + problem);
    }
  }
}

inline void write_stream(std::ostream& os, const Stream& s) {
  os << s.m << ' ' << s.k << ' ' << s.n << '\n';
  for (const auto& e : s.events) os << e.t << ' ' << e.site << ' ' << e.j << '\n';
}

inline Stream read_stream(std::istream& is) {
  Stream s;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string extra;
    if (!header) {
      if (!(ls >> s.m >> s.k >> s.n) || (ls >> extra)) {
        throw std::invalid_argument("stream line " + std::to_string(line_no) +
                                    ": expected header 'm k n'");
      }
      header = true;
      continue;
    }
    StreamEvent e;
    if (!(ls >> e.t >> e.site >> e.j) || (ls >> extra)) {
      throw std::invalid_argument("stream line " + std::to_string(line_no) +
                                  ": expected 't site j'");
    }
    s.events.push_back(e);
  }
  if (!header) throw std::invalid_argument("stream: missing header");
  validate_stream(s);
  return s;
}

/// n events, sites and coordinates uniform.
inline Stream uniform_stream(std::uint64_t m, std::uint32_t k, std::uint64_t n,
                             std::uint64_t seed) {
  Rng rng(seed);
  Stream s{m, k, n, {}};
  s.events.reserve(n);
  for (std::uint64_t t = 0; t < n; ++t) {
    const auto site = static_cast<std::uint32_t>(rng.below(k));
    s.events.push_back({t, site, rng.below(m)});
  }
  return s;
}

/// n events, sites uniform, coordinate j drawn with weight (j+1)^{-s}.
inline Stream zipf_stream(std::uint64_t m, std::uint32_t k, std::uint64_t n, double s_exp,
                          std::uint64_t seed) {
  if (!(s_exp >= 0)) throw std::invalid_argument("zipf: exponent must be non-negative");
  std::vector<double> cdf(m);
  double acc = 0;
  for (std::uint64_t j = 0; j < m; ++j) {
    acc += std::pow(static_cast<double>(j + 1), -s_exp);
    cdf[j] = acc;
  }
  Rng rng(seed);
  Stream s{m, k, n, {}};
  s.events.reserve(n);
  for (std::uint64_t t = 0; t < n; ++t) {
    const auto site = static_cast<std::uint32_t>(rng.below(k));
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    s.events.push_back({t, site, static_cast<Coordinate>(it - cdf.begin())});
  }
  return s;
}

}  // namespace fpmon
