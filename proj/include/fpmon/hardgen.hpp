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

// Generators, exact evaluators and structural validators for the structured
// multiparty inputs: set disjointness, bit-disjointness, block XOR (BTX),
// gap-majority and the stacked quantile instance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fpmon/core.hpp"
#include "fpmon/random.hpp"
#include "fpmon/streams.hpp"

namespace fpmon {

enum class Ternary { zero, one, star };

inline const char* to_string(Ternary t) {
  switch (t) {
    case Ternary::zero: return "0";
    case Ternary::one: return "1";
    default: return "*";
  }
}

namespace detail {

// `count` distinct values from [0, universe) minus `excluded` (sorted),
// uniformly; order of the result is the draw order.
inline std::vector<std::uint64_t> sample_distinct(Rng& rng, std::uint64_t universe,
                                                  std::size_t count,
                                                  const std::vector<std::uint64_t>& excluded = {}) {
  const auto is_excluded = [&](std::uint64_t x) {
    return std::binary_search(excluded.begin(), excluded.end(), x);
  };
  const std::uint64_t available = universe - excluded.size();
  if (count > available) throw std::invalid_argument("sample_distinct: not enough elements");
  if (4 * count <= available) {
    // Sparse draw: rejection against a small set.
    std::vector<std::uint64_t> out;
    std::set<std::uint64_t> seen;
    while (out.size() < count) {
      const auto x = rng.below(universe);
      if (is_excluded(x) || !seen.insert(x).second) continue;
      out.push_back(x);
    }
    return out;
  }
  std::vector<std::uint64_t> pool;
  pool.reserve(available);
  auto skip = excluded.begin();
  for (std::uint64_t x = 0; x < universe; ++x) {
    while (skip != excluded.end() && *skip < x) ++skip;
    if (skip == excluded.end() || *skip != x) pool.push_back(x);
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  }
  pool.resize(count);
  return pool;
}

inline std::vector<std::uint64_t> sorted(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline std::size_t intersection_size(const std::vector<std::uint64_t>& a,
                                     const std::vector<std::uint64_t>& b) {
  std::size_t n = 0;
  for (const auto x : a) n += std::binary_search(b.begin(), b.end(), x) ? 1 : 0;
  return n;
}

inline bool strictly_sorted_below(const std::vector<std::uint64_t>& v, std::uint64_t bound) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= bound || (i > 0 && v[i - 1] >= v[i])) return false;
  }
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Two-party set disjointness

struct DisjInstance {
  std::uint64_t nprime = 3;
  double beta = 0;
  std::vector<std::uint64_t> x, y;  // sorted
  bool intersecting = false;
  std::optional<std::uint64_t> witness;

  friend bool operator==(const DisjInstance&, const DisjInstance&) = default;
};

inline std::uint64_t disj_set_size(std::uint64_t nprime) {
  if (nprime < 3 || nprime % 4 != 3) {
    throw std::invalid_argument("universe size n' must satisfy n' = 3 (mod 4), got " +
                                std::to_string(nprime));
  }
  return (nprime + 1) / 4;
}

/// (x, y) of size (n'+1)/4 each: sharing exactly one element with
/// probability beta, disjoint otherwise. `unchecked_beta` lifts the
/// beta <= 1/4 restriction (tests only).
inline DisjInstance gen_two_disj(std::uint64_t nprime, double beta, std::uint64_t seed,
                                 bool unchecked_beta = false) {
  const std::uint64_t l = disj_set_size(nprime);
  if (!(beta >= 0 && beta <= (unchecked_beta ? 1.0 : 0.25))) {
    throw std::invalid_argument("gen_two_disj: beta must lie in [0, 1/4]");
  }
  Rng rng(seed);
  DisjInstance inst;
  inst.nprime = nprime;
  inst.beta = beta;
  inst.intersecting = rng.bernoulli(beta);
  if (inst.intersecting) {
    auto pick = detail::sample_distinct(rng, nprime, 2 * l - 1);
    inst.witness = pick[0];
    inst.x.assign(pick.begin(), pick.begin() + l);
    inst.y.push_back(pick[0]);
    inst.y.insert(inst.y.end(), pick.begin() + l, pick.end());
  } else {
    auto pick = detail::sample_distinct(rng, nprime, 2 * l);
    inst.x.assign(pick.begin(), pick.begin() + l);
    inst.y.assign(pick.begin() + l, pick.end());
  }
  inst.x = detail::sorted(inst.x);
  inst.y = detail::sorted(inst.y);
  return inst;
}

/// Draw of x given y under the same law: with probability beta one element of
/// y plus l-1 elements outside y, otherwise l elements outside y.
inline std::vector<std::uint64_t> sample_x_given_y(Rng& rng, std::uint64_t nprime, double beta,
                                                   const std::vector<std::uint64_t>& y) {
  const std::uint64_t l = disj_set_size(nprime);
  std::vector<std::uint64_t> x;
  if (rng.bernoulli(beta)) {
    x.push_back(y[rng.below(y.size())]);
    auto rest = detail::sample_distinct(rng, nprime, l - 1, y);
    x.insert(x.end(), rest.begin(), rest.end());
  } else {
    x = detail::sample_distinct(rng, nprime, l, y);
  }
  return detail::sorted(std::move(x));
}

inline std::optional<std::string> validate(const DisjInstance& d) {
  std::uint64_t l = 0;
  try {
    l = disj_set_size(d.nprime);
  } catch (const std::invalid_argument& e) {
    return std::string(e.what());
  }
  if (d.x.size() != l || d.y.size() != l) return "set sizes differ from (n'+1)/4";
  if (!detail::strictly_sorted_below(d.x, d.nprime) ||
      !detail::strictly_sorted_below(d.y, d.nprime)) {
    return "sets must be sorted, duplicate-free and inside [0, n')";
  }
  const auto common = detail::intersection_size(d.x, d.y);
  if (common > 1) return "sets share more than one element";
  if ((common == 1) != d.intersecting) return "label disagrees with the actual intersection";
  if (d.witness.has_value() != d.intersecting) return "witness present iff intersecting";
  if (d.witness && (!std::binary_search(d.x.begin(), d.x.end(), *d.witness) ||
                    !std::binary_search(d.y.begin(), d.y.end(), *d.witness))) {
    return "witness is not in both sets";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// k-party bit-disjointness

struct BitDisjInstance {
  std::uint32_t k = 1;
  std::uint64_t nprime = 3;
  double beta = 0;
  std::vector<std::vector<std::uint64_t>> x;  // per site, sorted
  std::vector<std::uint64_t> y;               // coordinator's set
  std::vector<std::uint8_t> z;                // z[i] = [x[i] meets y]

  friend bool operator==(const BitDisjInstance&, const BitDisjInstance&) = default;
};

/// Below this beta*k the instance is outside the recommended regime; the
/// generator still produces it.
inline constexpr double kRecommendedBetaK = 8.0;

inline BitDisjInstance gen_bit_disj(std::uint32_t k, std::uint64_t nprime, double beta,
                                    std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("gen_bit_disj: k must be positive");
  const auto first = gen_two_disj(nprime, beta, seed);
  BitDisjInstance inst;
  inst.k = k;
  inst.nprime = nprime;
  inst.beta = beta;
  inst.y = first.y;
  inst.x.push_back(first.x);
  Rng rng(hash_words(seed, 0xb17));
  for (std::uint32_t i = 1; i < k; ++i) inst.x.push_back(sample_x_given_y(rng, nprime, beta, inst.y));
  for (const auto& xi : inst.x) {
    inst.z.push_back(detail::intersection_size(xi, inst.y) > 0 ? 1 : 0);
  }
  return inst;
}

inline std::optional<std::string> validate(const BitDisjInstance& b) {
  if (b.x.size() != b.k || b.z.size() != b.k) return "expected k site sets and k bits";
  for (std::uint32_t i = 0; i < b.k; ++i) {
    DisjInstance pair{b.nprime, b.beta, b.x[i], b.y, b.z[i] == 1, std::nullopt};
    const auto common = detail::intersection_size(b.x[i], b.y);
    if (common == 1) {
      for (const auto v : b.x[i]) {
        if (std::binary_search(b.y.begin(), b.y.end(), v)) pair.witness = v;
      }
    }
    if (b.z[i] > 1) return "site " + std::to_string(i) + ": bit out of range";
    if (auto err = validate(pair)) return "site " + std::to_string(i) + ": " + *err;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Block XOR

struct BtxBlock {
  std::vector<std::uint32_t> owner;  // D: the site allowed a 1 in each column
  std::uint64_t special = 0;         // M
  std::uint8_t x = 0, y = 0;         // type S = xy
  std::vector<std::uint8_t> bits;    // k x n, row-major (site, column)

  std::uint8_t type() const noexcept { return static_cast<std::uint8_t>(2 * x + y); }
  friend bool operator==(const BtxBlock&, const BtxBlock&) = default;
};

struct BtxInstance {
  std::uint32_t k = 2;
  double p = 2;
  double eps = 0.5;
  std::uint64_t seed = 0;
  std::uint64_t n = 1;          // columns per block, round(k^p)
  std::uint64_t blocks = 1;     // round(1/eps^2)
  std::uint64_t inv_eps = 1;    // round(1/eps)
  std::vector<BtxBlock> block;

  std::uint8_t bit(std::uint64_t b, std::uint32_t site, std::uint64_t col) const {
    return block[b].bits[site * n + col];
  }
  std::uint64_t universe() const noexcept { return blocks * n; }
  friend bool operator==(const BtxInstance&, const BtxInstance&) = default;
};

inline BtxInstance gen_btx(std::uint32_t k, double p, double eps, std::uint64_t seed) {
  if (k < 2 || (k & (k - 1)) != 0) throw std::invalid_argument("gen_btx: k must be a power of 2");
  if (!(p > 0)) throw std::invalid_argument("gen_btx: p must be positive");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("gen_btx: eps must lie in (0,1)");
  BtxInstance inst;
  inst.k = k;
  inst.p = p;
  inst.eps = eps;
  inst.seed = seed;
  inst.n = static_cast<std::uint64_t>(std::llround(std::pow(static_cast<double>(k), p)));
  inst.blocks = static_cast<std::uint64_t>(std::llround(1.0 / (eps * eps)));
  inst.inv_eps = static_cast<std::uint64_t>(std::llround(1.0 / eps));
  Rng rng(seed);
  for (std::uint64_t b = 0; b < inst.blocks; ++b) {
    BtxBlock blk;
    blk.bits.assign(static_cast<std::size_t>(k) * inst.n, 0);
    blk.owner.resize(inst.n);
    for (std::uint64_t c = 0; c < inst.n; ++c) {
      blk.owner[c] = static_cast<std::uint32_t>(rng.below(k));
      if (rng.bernoulli(0.5)) blk.bits[blk.owner[c] * inst.n + c] = 1;
    }
    blk.special = rng.below(inst.n);
    blk.x = rng.bernoulli(0.5) ? 1 : 0;
    blk.y = rng.bernoulli(0.5) ? 1 : 0;
    for (std::uint32_t i = 0; i < k; ++i) {
      blk.bits[i * inst.n + blk.special] = i < k / 2 ? blk.x : blk.y;
    }
    inst.block.push_back(std::move(blk));
  }
  return inst;
}

/// 1 iff some column of the k x n block has exactly k/2 ones.
inline std::uint8_t xor_eval(const std::vector<std::uint8_t>& bits, std::uint32_t k,
                             std::uint64_t n) {
  if (k % 2 != 0) throw std::invalid_argument("xor_eval: k must be even");
  if (bits.size() != static_cast<std::size_t>(k) * n) {
    throw std::invalid_argument("xor_eval: matrix is not k x n");
  }
  for (std::uint64_t c = 0; c < n; ++c) {
    std::uint32_t ones = 0;
    for (std::uint32_t i = 0; i < k; ++i) ones += bits[i * n + c];
    if (ones == k / 2) return 1;
  }
  return 0;
}

/// Three-way decision on the count of XOR-positive blocks.
inline Ternary btx_decide(std::uint64_t xor_count, std::uint64_t blocks, std::uint64_t inv_eps) {
  const double dev = std::abs(static_cast<double>(xor_count) - static_cast<double>(blocks) / 2);
  if (dev >= 2.0 * static_cast<double>(inv_eps)) return Ternary::one;
  if (dev <= static_cast<double>(inv_eps)) return Ternary::zero;
  return Ternary::star;
}

inline std::uint64_t btx_xor_count(const BtxInstance& inst) {
  std::uint64_t count = 0;
  for (const auto& blk : inst.block) count += xor_eval(blk.bits, inst.k, inst.n);
  return count;
}

inline Ternary btx_eval(const BtxInstance& inst) {
  return btx_decide(btx_xor_count(inst), inst.blocks, inst.inv_eps);
}

/// Same decision from the recorded block types (blocks of type 01 or 10).
inline Ternary btx_eval_hidden(const BtxInstance& inst) {
  std::uint64_t count = 0;
  for (const auto& blk : inst.block) count += (blk.x != blk.y) ? 1 : 0;
  return btx_decide(count, inst.blocks, inst.inv_eps);
}

inline std::optional<std::string> validate(const BtxInstance& inst) {
  if (inst.block.size() != inst.blocks) return "block count differs from round(1/eps^2)";
  for (std::uint64_t b = 0; b < inst.blocks; ++b) {
    const auto& blk = inst.block[b];
    const std::string where = "block " + std::to_string(b) + ": ";
    if (blk.bits.size() != static_cast<std::size_t>(inst.k) * inst.n || blk.owner.size() != inst.n) {
      return where + "matrix is not k x n";
    }
    if (blk.special >= inst.n) return where + "special column out of range";
    if (blk.x > 1 || blk.y > 1) return where + "type bits out of range";
    for (std::uint64_t c = 0; c < inst.n; ++c) {
      if (blk.owner[c] >= inst.k) return where + "owner out of range";
      for (std::uint32_t i = 0; i < inst.k; ++i) {
        const auto v = blk.bits[i * inst.n + c];
        if (v > 1) return where + "entry is not a bit";
        if (c == blk.special) {
          if (v != (i < inst.k / 2 ? blk.x : blk.y)) {
            return where + "special column disagrees with its type";
          }
        } else if (v == 1 && i != blk.owner[c]) {
          return where + "column " + std::to_string(c) + " has a 1 outside its owner";
        }
      }
    }
  }
  return std::nullopt;
}

/// One insertion per 1-bit; item id = block * n + column. Events are ordered
/// by site, then by item id.
inline Stream btx_to_stream(const BtxInstance& inst) {
  Stream s;
  s.m = inst.universe();
  s.k = inst.k;
  for (std::uint32_t i = 0; i < inst.k; ++i) {
    for (std::uint64_t b = 0; b < inst.blocks; ++b) {
      for (std::uint64_t c = 0; c < inst.n; ++c) {
        if (inst.bit(b, i, c)) {
          s.events.push_back({s.events.size(), i, b * inst.n + c});
        }
      }
    }
  }
  s.n = std::max<std::uint64_t>(s.events.size(), 1);
  return s;
}

// ---------------------------------------------------------------------------
// Gap-majority

struct GapMajInstance {
  std::uint32_t k = 1;
  std::vector<std::uint8_t> z;

  friend bool operator==(const GapMajInstance&, const GapMajInstance&) = default;
};

inline GapMajInstance gen_gap_maj(std::uint32_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("gen_gap_maj: k must be positive");
  Rng rng(seed);
  GapMajInstance inst{k, {}};
  for (std::uint32_t i = 0; i < k; ++i) inst.z.push_back(rng.bernoulli(0.5) ? 1 : 0);
  return inst;
}

inline Ternary gap_maj_eval(const std::vector<std::uint8_t>& z, double beta = 0.5) {
  double sum = 0;
  for (const auto b : z) sum += b;
  const double mid = beta * static_cast<double>(z.size());
  const double gap = std::sqrt(mid);
  if (sum <= mid - gap) return Ternary::zero;
  if (sum >= mid + gap) return Ternary::one;
  return Ternary::star;
}

inline std::optional<std::string> validate(const GapMajInstance& g) {
  if (g.z.size() != g.k) return "expected k bits";
  for (const auto b : g.z) {
    if (b > 1) return "entry is not a bit";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Stacked quantile instance

struct QuantileInstance {
  std::uint32_t k = 1;
  double eps = 0.5;
  std::uint64_t copies = 1;                     // round(1/(eps sqrt k))
  std::vector<std::vector<std::uint8_t>> z;     // z[i][j]: copy i, site j
  std::vector<Multiset> sites;                  // site j: {2i + z[i][j]}

  Multiset united() const {
    Multiset all;
    for (const auto& s : sites) all.insert(all.end(), s.begin(), s.end());
    return all;
  }
  friend bool operator==(const QuantileInstance&, const QuantileInstance&) = default;
};

inline std::uint64_t quantile_copies(std::uint32_t k, double eps) {
  if (k == 0 || !(eps > 0)) throw std::invalid_argument("quantile instance: k, eps must be positive");
  const auto l = std::llround(1.0 / (eps * std::sqrt(static_cast<double>(k))));
  if (l < 1) {
    throw std::invalid_argument("quantile instance: round(1/(eps sqrt k)) < 1; eps too large for k");
  }
  return static_cast<std::uint64_t>(l);
}

inline QuantileInstance gen_quantile_instance(std::uint32_t k, double eps, std::uint64_t seed) {
  QuantileInstance inst;
  inst.k = k;
  inst.eps = eps;
  inst.copies = quantile_copies(k, eps);
  Rng rng(seed);
  inst.z.assign(inst.copies, std::vector<std::uint8_t>(k, 0));
  for (auto& row : inst.z) {
    for (auto& b : row) b = rng.bernoulli(0.5) ? 1 : 0;
  }
  inst.sites.assign(k, {});
  for (std::uint32_t j = 0; j < k; ++j) {
    for (std::uint64_t i = 0; i < inst.copies; ++i) {
      inst.sites[j].push_back(static_cast<Item>(2 * i + inst.z[i][j]));
    }
  }
  return inst;
}

/// Answer for copy i (0-based) read off the exact (i+1/2)/copies quantile.
inline std::uint8_t quantile_copy_answer(const QuantileInstance& inst, std::uint64_t i) {
  const double phi = (static_cast<double>(i) + 0.5) / static_cast<double>(inst.copies);
  return static_cast<std::uint8_t>(exact_quantile(inst.united(), phi) - static_cast<Item>(2 * i));
}

inline std::optional<std::string> validate(const QuantileInstance& q) {
  if (q.z.size() != q.copies || q.sites.size() != q.k) return "dimension mismatch";
  for (std::uint32_t j = 0; j < q.k; ++j) {
    if (q.sites[j].size() != q.copies) return "site " + std::to_string(j) + ": wrong item count";
    for (std::uint64_t i = 0; i < q.copies; ++i) {
      if (q.z[i].size() != q.k || q.z[i][j] > 1) return "hidden bit out of range";
      if (q.sites[j][i] != static_cast<Item>(2 * i + q.z[i][j])) {
        return "site " + std::to_string(j) + ": item " + std::to_string(i) +
               " disagrees with the hidden bits";
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text form: "TYPE k n eps seed", one "site: items..." row per site, then a
// "#meta" section with "key: values..." lines.

struct InstanceText {
  std::string type;
  std::uint32_t k = 0;
  std::uint64_t n = 0;
  double eps = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::int64_t>> rows;
  std::vector<std::pair<std::string, std::vector<std::int64_t>>> meta;

  const std::vector<std::int64_t>& meta_values(const std::string& key) const {
    for (const auto& [name, values] : meta) {
      if (name == key) return values;
    }
    throw std::invalid_argument("instance: missing meta key '" + key + "'");
  }
  std::int64_t meta_value(const std::string& key) const {
    const auto& v = meta_values(key);
    if (v.size() != 1) throw std::invalid_argument("instance: meta key '" + key + "' is not scalar");
    return v[0];
  }
};

inline void write_instance_text(std::ostream& os, const InstanceText& t) {
  os.precision(17);
  os << t.type << ' ' << t.k << ' ' << t.n << ' ' << t.eps << ' ' << t.seed << '\n';
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    os << i << ':';
    for (const auto v : t.rows[i]) os << ' ' << v;
    os << '\n';
  }
  os << "#meta\n";
  for (const auto& [key, values] : t.meta) {
    os << key << ':';
    for (const auto v : values) os << ' ' << v;
    os << '\n';
  }
}

inline InstanceText read_instance_text(std::istream& is) {
  InstanceText t;
  std::string line;
  std::size_t line_no = 0;
  // Leading "#" lines are comments (provenance); "#meta" opens the meta section.
  do {
    if (!std::getline(is, line)) throw std::invalid_argument("instance: empty input");
    ++line_no;
  } while (line.empty() || (line[0] == '#' && line != "#meta"));
  {
    std::istringstream hs(line);
    if (!(hs >> t.type >> t.k >> t.n >> t.eps >> t.seed)) {
      throw std::invalid_argument("instance: header must be 'TYPE k n eps seed'");
    }
  }
  bool in_meta = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "#meta") {
      in_meta = true;
      continue;
    }
    if (line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("instance line " + std::to_string(line_no) + ": missing ':'");
    }
    const std::string key = line.substr(0, colon);
    std::istringstream vs(line.substr(colon + 1));
    std::vector<std::int64_t> values;
    std::int64_t v;
    while (vs >> v) values.push_back(v);
    if (!vs.eof()) {
      throw std::invalid_argument("instance line " + std::to_string(line_no) + ": bad value");
    }
    if (in_meta) {
      t.meta.emplace_back(key, std::move(values));
    } else {
      if (key != std::to_string(t.rows.size())) {
        throw std::invalid_argument("instance line " + std::to_string(line_no) +
                                    ": site rows must be numbered 0, 1, ...");
      }
      t.rows.push_back(std::move(values));
    }
  }
  return t;
}

namespace detail {
template <typename T>
std::vector<std::int64_t> as_i64(const std::vector<T>& v) {
  return std::vector<std::int64_t>(v.begin(), v.end());
}
template <typename T>
std::vector<T> from_i64(const std::vector<std::int64_t>& v) {
  std::vector<T> out;
  for (const auto x : v) {
    if (x < 0) throw std::invalid_argument("instance: negative value");
    out.push_back(static_cast<T>(x));
  }
  return out;
}
}  // namespace detail

// Fixed-point encoding of beta in meta (parts per 10^9).
inline constexpr double kBetaScale = 1e9;

inline InstanceText to_text(const DisjInstance& d, std::uint64_t seed) {
  InstanceText t{"DISJ", 2, d.nprime, 0, seed, {detail::as_i64(d.x), detail::as_i64(d.y)}, {}};
  t.meta.push_back({"beta_ppb", {std::llround(d.beta * kBetaScale)}});
  t.meta.push_back({"intersecting", {d.intersecting ? 1 : 0}});
  if (d.witness) t.meta.push_back({"witness", {static_cast<std::int64_t>(*d.witness)}});
  return t;
}

inline InstanceText to_text(const BitDisjInstance& b, std::uint64_t seed) {
  InstanceText t{"BITDISJ", b.k, b.nprime, 0, seed, {}, {}};
  for (const auto& xi : b.x) t.rows.push_back(detail::as_i64(xi));
  t.meta.push_back({"beta_ppb", {std::llround(b.beta * kBetaScale)}});
  t.meta.push_back({"Y", detail::as_i64(b.y)});
  t.meta.push_back({"Z", detail::as_i64(b.z)});
  return t;
}

inline InstanceText to_text(const BtxInstance& inst) {
  InstanceText t{"BTX", inst.k, inst.n, inst.eps, inst.seed, {}, {}};
  for (std::uint32_t i = 0; i < inst.k; ++i) {
    std::vector<std::int64_t> row;
    for (std::uint64_t b = 0; b < inst.blocks; ++b) {
      for (std::uint64_t c = 0; c < inst.n; ++c) {
        if (inst.bit(b, i, c)) row.push_back(static_cast<std::int64_t>(b * inst.n + c));
      }
    }
    t.rows.push_back(std::move(row));
  }
  t.meta.push_back({"p_milli", {std::llround(inst.p * 1000)}});
  t.meta.push_back({"blocks", {static_cast<std::int64_t>(inst.blocks)}});
  t.meta.push_back({"inv_eps", {static_cast<std::int64_t>(inst.inv_eps)}});
  for (std::uint64_t b = 0; b < inst.blocks; ++b) {
    const auto& blk = inst.block[b];
    t.meta.push_back({"block" + std::to_string(b),
                      {static_cast<std::int64_t>(blk.special), blk.x, blk.y}});
    t.meta.push_back({"D" + std::to_string(b), detail::as_i64(blk.owner)});
  }
  return t;
}

inline InstanceText to_text(const GapMajInstance& g, std::uint64_t seed) {
  InstanceText t{"GAPMAJ", g.k, 1, 0, seed, {}, {}};
  for (const auto b : g.z) t.rows.push_back({b});
  return t;
}

inline InstanceText to_text(const QuantileInstance& q, std::uint64_t seed) {
  InstanceText t{"QUANTILE", q.k, 2 * q.copies, q.eps, seed, {}, {}};
  for (const auto& s : q.sites) t.rows.push_back(s);
  t.meta.push_back({"copies", {static_cast<std::int64_t>(q.copies)}});
  for (std::uint64_t i = 0; i < q.copies; ++i) {
    t.meta.push_back({"Z" + std::to_string(i), detail::as_i64(q.z[i])});
  }
  return t;
}

inline DisjInstance disj_from_text(const InstanceText& t) {
  if (t.type != "DISJ" || t.rows.size() != 2) throw std::invalid_argument("not a DISJ instance");
  DisjInstance d;
  d.nprime = t.n;
  d.beta = static_cast<double>(t.meta_value("beta_ppb")) / kBetaScale;
  d.x = detail::from_i64<std::uint64_t>(t.rows[0]);
  d.y = detail::from_i64<std::uint64_t>(t.rows[1]);
  d.intersecting = t.meta_value("intersecting") != 0;
  for (const auto& [key, values] : t.meta) {
    if (key == "witness" && values.size() == 1) d.witness = static_cast<std::uint64_t>(values[0]);
  }
  return d;
}

inline BitDisjInstance bit_disj_from_text(const InstanceText& t) {
  if (t.type != "BITDISJ") throw std::invalid_argument("not a BITDISJ instance");
  BitDisjInstance b;
  b.k = t.k;
  b.nprime = t.n;
  b.beta = static_cast<double>(t.meta_value("beta_ppb")) / kBetaScale;
  for (const auto& row : t.rows) b.x.push_back(detail::from_i64<std::uint64_t>(row));
  b.y = detail::from_i64<std::uint64_t>(t.meta_values("Y"));
  b.z = detail::from_i64<std::uint8_t>(t.meta_values("Z"));
  return b;
}

inline BtxInstance btx_from_text(const InstanceText& t) {
  if (t.type != "BTX" || t.rows.size() != t.k) throw std::invalid_argument("not a BTX instance");
  BtxInstance inst;
  inst.k = t.k;
  inst.n = t.n;
  inst.eps = t.eps;
  inst.seed = t.seed;
  inst.p = static_cast<double>(t.meta_value("p_milli")) / 1000.0;
  inst.blocks = static_cast<std::uint64_t>(t.meta_value("blocks"));
  inst.inv_eps = static_cast<std::uint64_t>(t.meta_value("inv_eps"));
  if (inst.n == 0 || inst.k == 0) throw std::invalid_argument("BTX: empty shape");
  for (std::uint64_t b = 0; b < inst.blocks; ++b) {
    BtxBlock blk;
    const auto& head = t.meta_values("block" + std::to_string(b));
    if (head.size() != 3) throw std::invalid_argument("BTX: block line needs 'M X Y'");
    blk.special = static_cast<std::uint64_t>(head[0]);
    blk.x = static_cast<std::uint8_t>(head[1]);
    blk.y = static_cast<std::uint8_t>(head[2]);
    blk.owner = detail::from_i64<std::uint32_t>(t.meta_values("D" + std::to_string(b)));
    blk.bits.assign(static_cast<std::size_t>(inst.k) * inst.n, 0);
    inst.block.push_back(std::move(blk));
  }
  for (std::uint32_t i = 0; i < inst.k; ++i) {
    for (const auto item : t.rows[i]) {
      if (item < 0 || static_cast<std::uint64_t>(item) >= inst.universe()) {
        throw std::invalid_argument("BTX: item outside the universe");
      }
      const auto b = static_cast<std::uint64_t>(item) / inst.n;
      const auto c = static_cast<std::uint64_t>(item) % inst.n;
      inst.block[b].bits[i * inst.n + c] = 1;
    }
  }
  return inst;
}

inline GapMajInstance gap_maj_from_text(const InstanceText& t) {
  if (t.type != "GAPMAJ") throw std::invalid_argument("not a GAPMAJ instance");
  GapMajInstance g{t.k, {}};
  for (const auto& row : t.rows) {
    if (row.size() != 1) throw std::invalid_argument("GAPMAJ: one bit per site");
    g.z.push_back(static_cast<std::uint8_t>(row[0]));
  }
  return g;
}

inline QuantileInstance quantile_from_text(const InstanceText& t) {
  if (t.type != "QUANTILE") throw std::invalid_argument("not a QUANTILE instance");
  QuantileInstance q;
  q.k = t.k;
  q.eps = t.eps;
  q.copies = static_cast<std::uint64_t>(t.meta_value("copies"));
  for (std::uint64_t i = 0; i < q.copies; ++i) {
    q.z.push_back(detail::from_i64<std::uint8_t>(t.meta_values("Z" + std::to_string(i))));
  }
  for (const auto& row : t.rows) q.sites.push_back(row);
  return q;
}

/// Parses any supported type and runs its validator.
inline std::optional<std::string> validate_text(const InstanceText& t) {
  try {
    if (t.type == "DISJ") return validate(disj_from_text(t));
    if (t.type == "BITDISJ") return validate(bit_disj_from_text(t));
    if (t.type == "BTX") return validate(btx_from_text(t));
    if (t.type == "GAPMAJ") return validate(gap_maj_from_text(t));
    if (t.type == "QUANTILE") return validate(quantile_from_text(t));
  } catch (const std::exception& e) {
    return std::string(e.what());
  }
  return "unknown instance type '" + t.type + "'";
}

}  // namespace fpmon
