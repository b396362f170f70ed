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

// fpmon_cli: stream and instance generation, protocol runs, reduction checks
// and communication sweeps. Exit status: 0 ok, 1 failed check or bad input,
// 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpmon/fpmon.hpp"

namespace {

using namespace fpmon;

// Thrown for checks that ran but did not hold; maps to exit status 1.
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

// "# key=value" lines for every option of the subcommand, as resolved. The
// output path is left out so reruns into different files compare equal.
void provenance(std::ostream& os, const CLI::App* sub) {
  os << "# command=" << sub->get_name() << '\n';
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "out") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    os << "# " << name << '=' << value << '\n';
  }
}

// Appends "--key value" for config-file entries whose flag is absent from
// the command line, so explicit flags win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  auto in = open_in(path);
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("config", path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) {
      args.push_back(flag);
      args.push_back(trim(line.substr(eq + 1)));
    }
  }
  return args;
}

std::vector<std::uint32_t> parse_ks(const std::string& list) {
  std::vector<std::uint32_t> ks;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v == 0) throw CLI::ValidationError("--k", "bad entry '" + item + "'");
    ks.push_back(static_cast<std::uint32_t>(v));
  }
  if (ks.empty()) throw CLI::ValidationError("--k", "empty list");
  return ks;
}

struct ProtocolFlags {
  std::string stream;
  std::string out;
  double p = 2;
  double eps = 0.2;
  double tau = 0;
  std::uint64_t seed = 1;
  std::uint64_t stride = 1;
  std::string increment = "inverse_probability";
  std::string estimation = "incremental";
  Constants c;
  // monitor only
  std::uint32_t copies = 0;
  double c_a = 1.0;
  double ladder_top = 0;
};

void add_protocol_flags(CLI::App* sub, ProtocolFlags& f, bool monitor) {
  sub->add_option("--stream", f.stream, "stream file")->required();
  sub->add_option("--out", f.out, "trace CSV ('-' for stdout)");
  sub->add_option("--p", f.p, "moment order")->check(CLI::PositiveNumber);
  sub->add_option("--eps", f.eps, "accuracy")->check(CLI::Range(1e-9, 1.0));
  if (!monitor) sub->add_option("--tau", f.tau, "threshold")->required()->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--stride", f.stride, "keep every stride-th trace row")->check(CLI::PositiveNumber);
  sub->add_option("--c-gamma", f.c.c_gamma, "gamma = c_gamma * eps");
  sub->add_option("--c-b", f.c.c_B, "B = max(8, c_B eps^-3 ceil(log2 n)^2)");
  sub->add_option("--c-r", f.c.c_r, "r = c_r ceil(log2 n)");
  sub->add_option("--big-c", f.c.C, "concentration constant");
  sub->add_option("--fire-fraction", f.c.fire_fraction, "fire at this fraction of tau (<=0: 1/sqrt(1+eps))");
  sub->add_option("--increment", f.increment, "counter increment")
      ->check(CLI::IsMember({"inverse_probability", "literal"}));
  sub->add_option("--estimation", f.estimation, "estimate maintenance")
      ->check(CLI::IsMember({"incremental", "literal"}));
  if (monitor) {
    sub->add_option("--copies", f.copies, "copies per threshold (odd; 0 = formula)");
    sub->add_option("--c-a", f.c_a, "copies = 2 ceil(c_a ln(10 I_max)) + 1");
    sub->add_option("--ladder-top", f.ladder_top, "largest threshold (0 = n^2 2^p)");
  }
}

int run_protocol(const CLI::App* sub, const ProtocolFlags& f, bool monitor) {
  auto in = open_in(f.stream);
  const Stream s = read_stream(in);
  Constants c = f.c;
  c.increment = parse_increment_policy(f.increment);
  const auto g = GlobalParams::make(s.k, s.m, std::max<std::uint64_t>(s.n, 2), f.p, f.eps,
                                    monitor ? 1.0 : f.tau, c);
  SimulationOptions opt;
  opt.mode = monitor ? RunMode::monitor : RunMode::threshold;
  opt.master_seed = f.seed;
  opt.stride = f.stride;
  opt.estimation = f.estimation == "literal" ? EstimationMode::literal_pass : EstimationMode::incremental;
  opt.monitor.copies = f.copies;
  opt.monitor.c_a = f.c_a;
  opt.monitor.ladder_top = f.ladder_top;
  const auto res = run_simulation(s, g, opt);
  Output out(f.out);
  provenance(out.get(), sub);
  out.get() << "# params " << g.describe() << '\n';
  write_trace(out.get(), res.rows);
  std::cerr << "events=" << s.events.size() << " messages=" << res.messages << " bits=" << res.bits
            << " final_fp=" << format_real(res.final_fp)
            << " final_estimate=" << format_real(res.final_estimate);
  if (!monitor) std::cerr << " fired_at=" << (res.fired_at ? std::to_string(*res.fired_at) : "never");
  std::cerr << '\n';
  return 0;
}

struct ReductionFlags {
  std::string which;
  std::uint32_t trials = 200;
  std::uint64_t seed = 1;
  std::uint32_t k = 0;
  double p = 0;
  double eps = 0;
  std::uint64_t nprime = 19999;
  double beta = 0.25;
  std::string out;
};

struct ReductionSummary {
  std::uint64_t trials = 0;
  std::uint64_t agree = 0;
  double expected = 0;
  std::string note;
};

ReductionSummary verify_btx(const ReductionFlags& f) {
  const std::uint32_t k = f.k ? f.k : 8;
  const double p = f.p > 0 ? f.p : 2.0;
  const double eps = f.eps > 0 ? f.eps : 0.25;
  ReductionSummary sum{0, 0, 0.95, ""};
  std::uint64_t skipped = 0;
  for (std::uint64_t t = 0; sum.trials < f.trials; ++t) {
    const auto inst = gen_btx(k, p, eps, hash_words(f.seed, t));
    const auto label = btx_eval(inst);
    if (label == Ternary::star) {
      ++skipped;
      continue;
    }
    ++sum.trials;
    sum.agree += btx_from_moments(btx_moments(inst, p), k, p, eps) == (label == Ternary::one ? 1 : 0);
  }
  sum.note = "star_skipped=" + std::to_string(skipped);
  return sum;
}

ReductionSummary verify_f0bit(const ReductionFlags& f) {
  const std::uint32_t k = f.k ? f.k : 400;
  const double eps = f.eps > 0 ? f.eps : 0.1;
  const std::uint64_t lprime = disj_set_size(f.nprime);
  ReductionSummary sum{f.trials, 0, 0.9, ""};
  std::uint64_t plain = 0;
  for (std::uint32_t t = 0; t < f.trials; ++t) {
    const auto inst = gen_bit_disj(k, f.nprime, f.beta, hash_words(f.seed, t));
    std::uint64_t n = 0;
    for (const auto z : inst.z) n += z;
    const double w = static_cast<double>(union_f0(inst));
    const double lambda = n == 0 ? 0.0 : distinct_lambda(n, lprime);
    const double tol = 1 / (4 * eps);
    sum.agree += std::abs(bit_from_f0(w, f.nprime, lprime, lambda) - static_cast<double>(n)) <= tol;
    plain += std::abs(bit_from_f0(w, f.nprime, lprime, 0.0) - static_cast<double>(n)) <= tol;
  }
  sum.note = "lambda0_agree=" + std::to_string(plain);
  return sum;
}

ReductionSummary verify_embed(const ReductionFlags& f) {
  const double p = f.p > 0 ? f.p : 2.0;
  const double eps = f.eps > 0 ? f.eps : 0.25;
  const auto r = static_cast<std::uint32_t>(std::ceil(64 / (eps * eps)));
  Rng rng(hash_words(f.seed, 0xe));
  std::vector<std::int64_t> x(f.k ? f.k : 32);
  for (auto& v : x) v = static_cast<std::int64_t>(rng.below(21)) - 10;
  const double target = std::pow(l2_norm(x), p);
  ReductionSummary sum{f.trials, 0, 0.9, "r=" + std::to_string(r)};
  for (std::uint32_t t = 0; t < f.trials; ++t) {
    const double got = embedded_moment(gaussian_embed(x, r, p, hash_words(f.seed, t)), p);
    sum.agree += std::abs(got / target - 1) <= eps / 3;
  }
  return sum;
}

ReductionSummary verify_quantile(const ReductionFlags& f) {
  const std::uint32_t k = f.k ? f.k : 16;
  const double eps = f.eps > 0 ? f.eps : 0.05;
  ReductionSummary sum{0, 0, 1.0, ""};
  for (std::uint32_t t = 0; t < f.trials; ++t) {
    const auto q = gen_quantile_instance(k, eps, hash_words(f.seed, t));
    for (std::uint64_t i = 0; i < q.copies; ++i) {
      const auto verdict = gap_maj_eval(q.z[i]);
      if (verdict == Ternary::star) continue;
      ++sum.trials;
      sum.agree += quantile_copy_answer(q, i) == (verdict == Ternary::one ? 1 : 0);
    }
  }
  sum.note = "gap_regime_copies=" + std::to_string(sum.trials);
  return sum;
}

int run_reduction(const CLI::App* sub, const ReductionFlags& f) {
  ReductionSummary sum;
  if (f.which == "btx") sum = verify_btx(f);
  if (f.which == "f0bit") sum = verify_f0bit(f);
  if (f.which == "embed") sum = verify_embed(f);
  if (f.which == "quantile") sum = verify_quantile(f);
  const double frac = sum.trials ? static_cast<double>(sum.agree) / static_cast<double>(sum.trials) : 0;
  Output out(f.out);
  provenance(out.get(), sub);
  out.get() << "reduction,trials,agree,fraction,expected,note\n"
            << f.which << ',' << sum.trials << ',' << sum.agree << ',' << format_real(frac) << ','
            << format_real(sum.expected) << ',' << sum.note << '\n';
  if (frac < sum.expected) throw CheckFailed(f.which + ": agreement " + format_real(frac) + " below " + format_real(sum.expected));
  return 0;
}

struct HardFlags {
  std::string type;
  std::uint32_t k = 8;
  std::uint64_t nprime = 99;
  double beta = 0.25;
  double p = 2;
  double eps = 0.25;
  std::uint64_t seed = 1;
  std::string out;
};

int gen_hard(const CLI::App* sub, const HardFlags& f) {
  InstanceText text;
  if (f.type == "disj") text = to_text(gen_two_disj(f.nprime, f.beta, f.seed), f.seed);
  if (f.type == "bitdisj") {
    if (f.beta * f.k < kRecommendedBetaK) {
      std::cerr << "warning: beta*k = " << f.beta * f.k << " is below " << kRecommendedBetaK << '\n';
    }
    text = to_text(gen_bit_disj(f.k, f.nprime, f.beta, f.seed), f.seed);
  }
  if (f.type == "btx") text = to_text(gen_btx(f.k, f.p, f.eps, f.seed));
  if (f.type == "gapmaj") text = to_text(gen_gap_maj(f.k, f.seed), f.seed);
  if (f.type == "quantile") text = to_text(gen_quantile_instance(f.k, f.eps, f.seed), f.seed);
  Output out(f.out);
  provenance(out.get(), sub);
  write_instance_text(out.get(), text);
  return 0;
}

int validate_hard(const std::string& path) {
  auto in = open_in(path);
  InstanceText text;
  try {
    text = read_instance_text(in);
  } catch (const std::invalid_argument& e) {
    throw CheckFailed(std::string("malformed instance: ") + e.what());
  }
  if (const auto err = validate_text(text)) throw CheckFailed(text.type + ": " + *err);
  std::cout << "ok " << text.type << '\n';
  return 0;
}

struct StreamFlags {
  std::string kind = "zipf";
  std::uint64_t m = 4096;
  std::uint32_t k = 8;
  std::uint64_t n = 20000;
  double s = 1.1;
  double p = 2;
  double eps = 0.25;
  std::uint64_t seed = 1;
  std::string out;
};

int gen_stream(const CLI::App* sub, const StreamFlags& f) {
  Stream s;
  if (f.kind == "uniform") s = uniform_stream(f.m, f.k, f.n, f.seed);
  if (f.kind == "zipf") s = zipf_stream(f.m, f.k, f.n, f.s, f.seed);
  if (f.kind == "btx") s = btx_to_stream(gen_btx(f.k, f.p, f.eps, f.seed));
  Output out(f.out);
  provenance(out.get(), sub);
  write_stream(out.get(), s);
  return 0;
}

struct BenchFlags {
  std::string ks = "4,8,16";
  std::string out;
  BenchConfig cfg;
};

int bench(const CLI::App* sub, BenchFlags& f) {
  f.cfg.ks = parse_ks(f.ks);
  const auto rows = bench_comm(f.cfg);
  Output out(f.out);
  provenance(out.get(), sub);
  out.get() << "k,trials,mean_messages,mean_bits,fired_fraction\n";
  for (const auto& r : rows) {
    out.get() << r.k << ',' << r.trials << ',' << format_real(r.mean_messages) << ','
              << format_real(r.mean_bits) << ',' << format_real(r.fired_fraction) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed F_p monitoring simulator"};
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);
  app.option_defaults()->always_capture_default();

  StreamFlags sf;
  auto* gs = app.add_subcommand("gen-stream", "generate an update stream");
  gs->add_option("--kind", sf.kind)->check(CLI::IsMember({"uniform", "zipf", "btx"}));
  gs->add_option("--m", sf.m, "universe size")->check(CLI::PositiveNumber);
  gs->add_option("--k", sf.k, "sites")->check(CLI::PositiveNumber);
  gs->add_option("--n", sf.n, "events");
  gs->add_option("--s", sf.s, "zipf exponent");
  gs->add_option("--p", sf.p, "btx: moment order");
  gs->add_option("--eps", sf.eps, "btx: accuracy");
  gs->add_option("--seed", sf.seed);
  gs->add_option("--out", sf.out, "output file ('-' for stdout)");

  HardFlags hf;
  auto* gh = app.add_subcommand("gen-hard", "generate a structured hard instance");
  gh->add_option("--type", hf.type)->required()->check(CLI::IsMember({"disj", "bitdisj", "btx", "gapmaj", "quantile"}));
  gh->add_option("--k", hf.k, "sites")->check(CLI::PositiveNumber);
  gh->add_option("--nprime", hf.nprime, "set universe, 3 mod 4");
  gh->add_option("--beta", hf.beta, "intersection probability");
  gh->add_option("--p", hf.p);
  gh->add_option("--eps", hf.eps);
  gh->add_option("--seed", hf.seed);
  gh->add_option("--out", hf.out);

  std::string validate_path;
  auto* vh = app.add_subcommand("validate-hard", "check a hard instance file");
  vh->add_option("--in,input", validate_path, "instance file")->required();

  ProtocolFlags tf, mf;
  auto* rt = app.add_subcommand("run-threshold", "one threshold instance over a stream");
  add_protocol_flags(rt, tf, false);
  auto* rm = app.add_subcommand("run-monitor", "continuous monitor over a stream");
  add_protocol_flags(rm, mf, true);

  ReductionFlags rf;
  auto* vr = app.add_subcommand("verify-reduction", "Monte-Carlo check of a reduction");
  vr->add_option("which", rf.which)->required()->check(CLI::IsMember({"btx", "f0bit", "embed", "quantile"}));
  vr->add_option("--trials", rf.trials)->check(CLI::PositiveNumber);
  vr->add_option("--seed", rf.seed);
  vr->add_option("--k", rf.k, "sites (embed: vector length); 0 = default");
  vr->add_option("--p", rf.p, "0 = default");
  vr->add_option("--eps", rf.eps, "0 = default");
  vr->add_option("--nprime", rf.nprime, "f0bit: set universe");
  vr->add_option("--beta", rf.beta, "f0bit: intersection probability");
  vr->add_option("--out", rf.out);

  BenchFlags bf;
  auto* bc = app.add_subcommand("bench-comm", "mean communication per k");
  bc->add_option("--k", bf.ks, "comma-separated site counts");
  bc->add_option("--p", bf.cfg.p)->check(CLI::PositiveNumber);
  bc->add_option("--eps", bf.cfg.eps)->check(CLI::Range(1e-9, 1.0));
  bc->add_option("--m", bf.cfg.m)->check(CLI::PositiveNumber);
  bc->add_option("--n", bf.cfg.n)->check(CLI::PositiveNumber);
  bc->add_option("--s", bf.cfg.zipf_s, "zipf exponent");
  bc->add_option("--trials", bf.cfg.trials)->check(CLI::PositiveNumber);
  bc->add_option("--seed", bf.cfg.seed);
  bc->add_option("--c-r", bf.cfg.constants.c_r);
  bc->add_option("--c-b", bf.cfg.constants.c_B);
  bc->add_option("--out", bf.out);

  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--config")->description("key=value file; explicit flags take precedence");
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*gs) return gen_stream(gs, sf);
    if (*gh) return gen_hard(gh, hf);
    if (*vh) return validate_hard(validate_path);
    if (*rt) return run_protocol(rt, tf, false);
    if (*rm) return run_protocol(rm, mf, true);
    if (*vr) return run_reduction(vr, rf);
    if (*bc) return bench(bc, bf);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const CheckFailed& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
