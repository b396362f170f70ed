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

// Prints one PASS/FAIL line per acceptance criterion. Exit status is nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fpmon/fpmon.hpp"

namespace {

using namespace fpmon;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// k=8, m=4096, p=2, eps=0.2, 2e4 zipf updates; tau sits at F_final/(2^p 1.25).
constexpr std::uint32_t kK = 8;
constexpr std::uint64_t kM = 4096;
constexpr std::uint64_t kN = 20000;
constexpr double kP = 2.0;
constexpr double kEps = 0.2;

Verdict threshold_correctness() {
  const int seeds = 60;
  int good = 0;
  for (int s = 1; s <= seeds; ++s) {
    const auto stream = zipf_stream(kM, kK, kN, 1.1, s);
    RunningMoment truth(kM, kP);
    for (const auto& e : stream.events) truth.add(e.j);
    const double tau = truth.value() / (std::pow(2.0, kP) * 1.25);
    const auto g = GlobalParams::make(kK, kM, kN, kP, kEps, tau);
    SimulationOptions opt;
    opt.master_seed = 5000 + s;
    const auto res = run_simulation(stream, g, opt);
    bool ok = true;
    for (const auto& row : res.rows) {
      const bool out = row.fired_instances == 1;
      if (out && row.true_fp < tau / (1 + kEps)) ok = false;
      if (!out && row.true_fp >= std::pow(2.0, kP) * tau) ok = false;
    }
    good += ok ? 1 : 0;
  }
  return {3 * good >= 2 * seeds, std::to_string(good) + "/" + std::to_string(seeds) + " seeds correct"};
}

Verdict monitor_correctness() {
  const int seeds = 12;
  int good = 0;
  double worst = 1;
  Constants c;
  c.c_r = 1;
  const auto g = GlobalParams::make(kK, kM, kN, kP, kEps, 1.0, c);
  const double band = (1 + kEps) * (1 + kEps);
  for (int s = 1; s <= seeds; ++s) {
    SimulationOptions opt;
    opt.mode = RunMode::monitor;
    opt.master_seed = 7000 + s;
    opt.monitor.copies = 3;
    const auto res = run_simulation(zipf_stream(kM, kK, kN, 1.1, 100 + s), g, opt);
    bool ok = true;
    for (const auto& row : res.rows) {
      const double q = row.estimate / row.true_fp;
      worst = std::min(worst, std::min(q, 1 / q));
      if (q > band || q < 1 / band) ok = false;
    }
    good += ok ? 1 : 0;
  }
  return {3 * good >= 2 * seeds,
          std::to_string(good) + "/" + std::to_string(seeds) +
              " seeds inside the (1+eps)^2 band at every event; worst ratio " + fmt("%.4f", worst)};
}

Verdict communication_scaling() {
  std::ostringstream detail;
  bool pass = true;
  for (const auto& [p, ks, limit] :
       {std::tuple<double, std::vector<std::uint32_t>, double>{2.0, {4, 8, 16, 32}, 3.0},
        {3.0, {4, 8, 16}, 6.0}}) {
    BenchConfig cfg;
    cfg.ks = ks;
    cfg.p = p;
    cfg.eps = 0.25;
    cfg.trials = 3;
    const auto rows = bench_comm(cfg);
    detail << "p=" << p << " bits";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail << (i ? "," : " ") << rows[i].k << ":" << fmt("%.0f", rows[i].mean_bits);
      if (i > 0) {
        const double ratio = rows[i].mean_bits / rows[i - 1].mean_bits;
        detail << "(x" << fmt("%.2f", ratio) << ")";
        if (!(ratio <= limit)) pass = false;
      }
    }
    detail << "; ";
  }
  return {pass, detail.str()};
}

std::string trace_text(const Stream& s, const GlobalParams& g, const SimulationOptions& o) {
  std::ostringstream os;
  write_trace(os, run_simulation(s, g, o).rows);
  return os.str();
}

Verdict counters_and_determinism() {
  std::vector<std::string> problems;
  const auto s = zipf_stream(512, 4, 3000, 1.1, 3);
  // Counter = (messages for (z, l, j)) x increment, with messages tallied
  // independently of the coordinator.
  for (const auto policy : {IncrementPolicy::inverse_probability, IncrementPolicy::literal}) {
    Constants c;
    c.c_r = 1;
    c.fire_fraction = 1e300;
    c.increment = policy;
    const auto g = GlobalParams::make(4, 512, 3000, 2.0, 0.3, 2e4, c);
    const auto seeds = ProtocolSeeds::derive(11);
    const SiteSendRule rule(g, PublicCoin(seeds.coin, g.r, g.m), seeds.site);
    ThresholdCoordinator coord(g, seeds.eta);
    std::vector<SiteState> sites;
    for (std::uint32_t i = 0; i < g.k; ++i) sites.emplace_back(i, g.m);
    std::map<std::tuple<std::uint32_t, Level, Coordinate>, std::uint64_t> tally;
    for (const auto& e : s.events) {
      for (const auto& msg : site_on_update(sites[e.site], e.j, e.t, rule)) {
        ++tally[{msg.z, msg.level, msg.j}];
        coord.on_message(msg);
      }
    }
    for (Level l = 0; l <= g.max_level; ++l) {
      const double inc = policy == IncrementPolicy::literal
                             ? g.level_scale(l) / g.B
                             : std::max(g.level_scale(l) / g.B, 1.0);
      if (coord.increment(l) != inc) problems.push_back("increment mismatch");
      for (std::uint32_t z = 1; z <= g.r; ++z) {
        for (Coordinate j = 0; j < g.m; ++j) {
          const auto it = tally.find({z, l, j});
          const double want = it == tally.end() ? 0.0 : static_cast<double>(it->second) * inc;
          if (coord.counter(z, l, j) != want) problems.push_back("counter mismatch");
        }
      }
    }
    // Incremental and literal estimation agree bit for bit.
    ThresholdCoordinator lit(g, seeds.eta, EstimationMode::literal_pass);
    ThresholdCoordinator inc_again(g, seeds.eta, EstimationMode::incremental);
    std::vector<SiteState> again;
    for (std::uint32_t i = 0; i < g.k; ++i) again.emplace_back(i, g.m);
    for (const auto& e : s.events) {
      for (const auto& msg : site_on_update(again[e.site], e.j, e.t, rule)) {
        lit.on_message(msg);
        inc_again.on_message(msg);
        if (lit.estimate() != inc_again.estimate()) problems.push_back("estimate mismatch");
      }
    }
  }
  // Byte-identical reruns.
  {
    Constants c;
    c.c_r = 1;
    const auto g = GlobalParams::make(4, 512, 3000, 2.0, 0.3, 5e4, c);
    SimulationOptions opt;
    opt.master_seed = 8;
    if (trace_text(s, g, opt) != trace_text(s, g, opt)) problems.push_back("threshold rerun differs");
    opt.mode = RunMode::monitor;
    opt.monitor.copies = 3;
    if (trace_text(s, g, opt) != trace_text(s, g, opt)) problems.push_back("monitor rerun differs");
  }
  // One-way: sites with a live coordinator emit what detached sites emit.
  {
    const auto g = GlobalParams::make(4, 512, 3000, 2.0, 0.3, 3e3);
    const auto seeds = ProtocolSeeds::derive(9);
    ThresholdRun run(g, seeds);
    const SiteSendRule rule(g, PublicCoin(seeds.coin, g.r, g.m), seeds.site);
    std::vector<SiteState> shadow;
    for (std::uint32_t i = 0; i < g.k; ++i) shadow.emplace_back(i, g.m);
    std::uint64_t detached = 0, attached = 0;
    bool ever_terminated = false;
    for (const auto& e : s.events) {
      const bool live = !run.coordinator().terminated();
      attached += run.on_update(e.site, e.j, e.t).messages;
      const auto msgs = site_on_update(shadow[e.site], e.j, e.t, rule);
      if (live) detached += msgs.size();
      ever_terminated = ever_terminated || !live;
    }
    if (attached != detached) problems.push_back("sites depend on the coordinator");
    for (std::uint32_t i = 0; i < g.k; ++i) {
      if (!(run.sites()[i].v == shadow[i].v)) problems.push_back("site state diverged");
    }
    if (!ever_terminated) problems.push_back("one-way check never reached termination");
  }
  std::sort(problems.begin(), problems.end());
  problems.erase(std::unique(problems.begin(), problems.end()), problems.end());
  std::string detail = problems.empty() ? "counters, reruns and one-way check exact" : "";
  for (const auto& p : problems) detail += p + "; ";
  return {problems.empty(), detail};
}

Verdict sampling_marginals() {
  const std::uint64_t m = 100000;
  PublicCoin coin(2024, 1, m);
  double worst = 0;
  for (Level l = 0; l <= 10; ++l) {
    std::uint64_t count = 0;
    for (Coordinate j = 0; j < m; ++j) count += coin.in_sample(1, l, j) ? 1 : 0;
    const double q = std::ldexp(1.0, -l);
    const double sigma = std::sqrt(m * q * (1 - q));
    const double dev = std::abs(static_cast<double>(count) - m * q);
    worst = std::max(worst, sigma > 0 ? dev / sigma : dev);
  }
  return {worst <= 4, "max deviation " + fmt("%.2f", worst) + " sigma over levels 0..10"};
}

Verdict btx_reduction() {
  int agree = 0, total = 0;
  for (std::uint64_t seed = 0; total < 200; ++seed) {
    const auto inst = gen_btx(8, 2.0, 0.25, seed);
    const auto label = btx_eval(inst);
    if (label == Ternary::star) continue;
    ++total;
    agree += btx_from_moments(btx_moments(inst, 2.0), 8, 2.0, 0.25) == (label == Ternary::one ? 1 : 0);
  }
  return {agree * 100 >= 95 * total,
          std::to_string(agree) + "/" + std::to_string(total) + " non-star instances agree"};
}

Verdict f0_reduction() {
  const double eps = 0.1;
  const int trials = 200;
  // Bin-ball at l = 25000 bins, N ~ Bin(400, 1/4) balls.
  Rng rng(31);
  int ball_ok = 0;
  for (int t = 0; t < trials; ++t) {
    std::uint64_t n = 0;
    for (int i = 0; i < 400; ++i) n += rng.bernoulli(0.25) ? 1 : 0;
    const auto r = simulate_bin_ball(n, 25000, rng);
    ball_ok += std::abs(static_cast<double>(r) - expected_distinct(n, 25000)) <= 1 / (10 * eps);
  }
  // bit_from_f0 on k = 400 sites, n' = 19999, l' = 5000, beta = 1/4.
  int est_ok = 0, est_ok_plain = 0;
  for (int t = 0; t < trials; ++t) {
    const auto inst = gen_bit_disj(400, 19999, 0.25, 900 + t);
    std::uint64_t n = 0;
    for (const auto z : inst.z) n += z;
    const double w = static_cast<double>(union_f0(inst));
    const double lambda = n == 0 ? 0.0 : distinct_lambda(n, 5000);
    est_ok += std::abs(bit_from_f0(w, 19999, 5000, lambda) - static_cast<double>(n)) <= 1 / (4 * eps);
    est_ok_plain += std::abs(bit_from_f0(w, 19999, 5000, 0.0) - static_cast<double>(n)) <= 1 / (4 * eps);
  }
  const bool pass = ball_ok * 10 >= 9 * trials && est_ok * 10 >= 9 * trials;
  return {pass, "bin-ball " + std::to_string(ball_ok) + "/200, estimator " + std::to_string(est_ok) +
                    "/200 (lambda=0: " + std::to_string(est_ok_plain) + "/200)"};
}

double integrate_gp(double p) {
  const auto f = [p](double u) {
    const double x = u * u;
    return 4 * u * std::pow(x, p) * std::exp(-x * x / 2) / std::sqrt(2 * std::numbers::pi);
  };
  const int steps = 200000;
  const double h = 4.0 / steps;
  double sum = f(0) + f(4.0);
  for (int i = 1; i < steps; ++i) sum += f(i * h) * (i % 2 ? 4 : 2);
  return sum * h / 3;
}

Verdict embedding() {
  const double eps = 0.25;
  const auto r = static_cast<std::uint32_t>(64 / (eps * eps));
  Rng rng(4);
  std::vector<std::int64_t> x(32);
  for (auto& v : x) v = static_cast<std::int64_t>(rng.below(21)) - 10;
  const double norm = l2_norm(x);
  bool pass = true;
  std::ostringstream detail;
  for (const double p : {1.0, 2.0, 3.0}) {
    int good = 0;
    for (int t = 0; t < 100; ++t) {
      const double got = embedded_moment(gaussian_embed(x, r, p, 300 + t), p);
      good += std::abs(got / std::pow(norm, p) - 1) <= eps / 3;
    }
    if (good < 90) pass = false;
    detail << "p=" << p << ": " << good << "/100; ";
  }
  double gp_err = 0;
  for (const double p : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
    gp_err = std::max(gp_err, std::abs(gp_moment(p) - integrate_gp(p)));
  }
  if (gp_err > 1e-6) pass = false;
  detail << "G_p max error " << fmt("%.1e", gp_err);
  return {pass, detail.str()};
}

Verdict hard_instances() {
  std::vector<std::string> problems;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    if (validate(gen_two_disj(99, 0.25, s))) problems.push_back("DISJ");
    if (validate(gen_bit_disj(16, 63, 0.25, s))) problems.push_back("BITDISJ");
    if (validate(gen_gap_maj(16, s))) problems.push_back("GAPMAJ");
    if (validate(gen_quantile_instance(16, 0.05, s))) problems.push_back("QUANTILE");
  }
  std::vector<double> types(4, 0);
  double blocks = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto inst = gen_btx(8, 2.0, 0.25, s);
    if (validate(inst)) problems.push_back("BTX");
    for (const auto& blk : inst.block) {
      types[blk.type()] += 1;
      blocks += 1;
    }
  }
  double worst = 0;
  const double sigma = std::sqrt(blocks * 0.25 * 0.75);
  for (const double t : types) worst = std::max(worst, std::abs(t - blocks / 4) / sigma);
  if (worst > 4) problems.push_back("type frequencies");
  std::uint64_t decided = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto q = gen_quantile_instance(16, 0.05, s);
    for (std::uint64_t i = 0; i < q.copies; ++i) {
      int ones = 0;
      for (const auto b : q.z[i]) ones += b;
      if (std::abs(ones - 8) < 4) continue;
      ++decided;
      if (quantile_copy_answer(q, i) != (ones > 8 ? 1 : 0)) problems.push_back("quantile round trip");
    }
  }
  std::sort(problems.begin(), problems.end());
  problems.erase(std::unique(problems.begin(), problems.end()), problems.end());
  std::string detail = "type deviation " + fmt("%.2f", worst) + " sigma; " +
                       std::to_string(decided) + " gap-regime copies checked";
  for (const auto& p : problems) detail += "; failed: " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  using Check = Verdict (*)();
  const Check checks[] = {threshold_correctness, monitor_correctness, communication_scaling,
                          counters_and_determinism, sampling_marginals, btx_reduction,
                          f0_reduction, embedding, hard_instances};
  int failed = 0;
  for (int i = 0; i < 9; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const auto v = checks[i]();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s [%.1fs]\n", i + 1, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
