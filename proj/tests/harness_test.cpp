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

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "fpmon/harness.hpp"
#include "fpmon/streams.hpp"

namespace fpmon {
namespace {

GlobalParams params_for(const Stream& s, double tau = 1e4) {
  Constants c;
  c.c_r = 1;
  return GlobalParams::make(s.k, s.m, std::max<std::uint64_t>(s.n, 2), 2.0, 0.25, tau, c);
}

TEST(StreamIoTest, RoundTrip) {
  const auto s = zipf_stream(300, 4, 500, 1.1, 2);
  std::stringstream ss;
  write_stream(ss, s);
  EXPECT_EQ(ss.str().substr(0, 10), "300 4 500\n");
  EXPECT_EQ(read_stream(ss), s);
}

TEST(StreamIoTest, ReportsMalformedEventPosition) {
  std::stringstream bad_site("10 2 5\n0 0 1\n1 2 3\n");
  try {
    read_stream(bad_site);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("position 1"), std::string::npos) << e.what();
  }
  std::stringstream bad_j("10 2 5\n0 0 10\n");
  EXPECT_THROW(read_stream(bad_j), std::invalid_argument);
  std::stringstream bad_t("10 2 5\n0 0 1\n0 1 1\n");
  EXPECT_THROW(read_stream(bad_t), std::invalid_argument);
  std::stringstream too_long("10 2 1\n0 0 1\n1 1 1\n");
  EXPECT_THROW(read_stream(too_long), std::invalid_argument);
  std::stringstream garbage("10 2 5\n0 zero 1\n");
  EXPECT_THROW(read_stream(garbage), std::invalid_argument);
  std::stringstream no_header("");
  EXPECT_THROW(read_stream(no_header), std::invalid_argument);
}

TEST(StreamGenTest, GeneratorsAreDeterministicAndInRange) {
  EXPECT_EQ(uniform_stream(100, 4, 50, 3), uniform_stream(100, 4, 50, 3));
  EXPECT_NE(uniform_stream(100, 4, 50, 3), uniform_stream(100, 4, 50, 4));
  const auto z = zipf_stream(1000, 8, 20000, 1.1, 5);
  EXPECT_NO_THROW(validate_stream(z));
  std::uint64_t zeros = 0, tail = 0;
  for (const auto& e : z.events) {
    zeros += e.j == 0;
    tail += e.j >= 500;
  }
  EXPECT_GT(zeros, tail / 10);  // item 0 dominates under s = 1.1
}

TEST(SimulationTest, EmptyStreamGivesEmptyTrace) {
  Stream s{16, 2, 1, {}};
  const auto res = run_simulation(s, params_for(s));
  EXPECT_TRUE(res.rows.empty());
  EXPECT_EQ(res.messages, 0u);
}

TEST(SimulationTest, SingleEventHasUnitMoment) {
  for (const double p : {1.5, 2.0, 3.0}) {
    Stream s{16, 2, 1, {{0, 1, 7}}};
    auto g = params_for(s);
    g.p = p;
    const auto res = run_simulation(s, g);
    ASSERT_EQ(res.rows.size(), 1u);
    EXPECT_EQ(res.rows[0].true_fp, 1.0);
  }
}

TEST(SimulationTest, ShapeMismatchIsRejected) {
  const auto s = uniform_stream(16, 2, 10, 1);
  auto g = params_for(s);
  g.m = 32;
  EXPECT_THROW(run_simulation(s, g), std::invalid_argument);
}

std::string trace_text(const SimulationResult& r) {
  std::ostringstream os;
  write_trace(os, r.rows);
  return os.str();
}

TEST(SimulationTest, RerunsAreByteIdentical) {
  const auto s = zipf_stream(256, 4, 2000, 1.1, 9);
  const auto g = params_for(s);
  SimulationOptions opt;
  opt.master_seed = 42;
  EXPECT_EQ(trace_text(run_simulation(s, g, opt)), trace_text(run_simulation(s, g, opt)));
  opt.mode = RunMode::monitor;
  opt.monitor.copies = 3;
  EXPECT_EQ(trace_text(run_simulation(s, g, opt)), trace_text(run_simulation(s, g, opt)));
  SimulationOptions other = opt;
  other.master_seed = 43;
  EXPECT_NE(trace_text(run_simulation(s, g, opt)), trace_text(run_simulation(s, g, other)));
}

TEST(SimulationTest, TrueMomentMatchesRecomputation) {
  const auto s = zipf_stream(256, 4, 3000, 1.1, 10);
  for (const double p : {2.0, 2.5, 3.0}) {
    auto g = params_for(s);
    g.p = p;
    const auto res = run_simulation(s, g);
    Rng rng(p * 10);
    for (int check = 0; check < 10; ++check) {
      const auto t = rng.below(s.events.size());
      FreqVector v(s.m);
      for (std::uint64_t i = 0; i <= t; ++i) v.add(s.events[i].j);
      const double ref = exact_fp(v, p);
      ASSERT_NEAR(res.rows[t].true_fp, ref, 1e-12 * ref) << "t=" << t;
    }
  }
}

TEST(SimulationTest, TraceInvariants) {
  const auto s = zipf_stream(256, 4, 3000, 1.1, 10);
  const auto res = run_simulation(s, params_for(s));
  ASSERT_EQ(res.rows.size(), s.events.size());
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    ASSERT_GE(res.rows[i].cum_bits, res.rows[i - 1].cum_bits);
    ASSERT_GE(res.rows[i].true_fp, res.rows[i - 1].true_fp);
    ASSERT_EQ(res.rows[i].t, i);
  }
  EXPECT_TRUE(res.fired_at.has_value());
}

TEST(SimulationTest, MessageConservation) {
  const auto s = zipf_stream(256, 4, 3000, 1.1, 10);
  const auto g = params_for(s, 1e9);
  ThresholdRun run(g, ProtocolSeeds::derive(1));
  std::uint64_t emitted = 0;
  for (const auto& e : s.events) emitted += run.on_update(e.site, e.j, e.t).messages;
  EXPECT_EQ(run.messages(), emitted);
  EXPECT_EQ(run.coordinator().messages_received() + run.coordinator().dropped(), emitted);
  EXPECT_EQ(run.bits(), emitted * run.rule().message_bits());
}

TEST(SimulationTest, StrideKeepsLastRow) {
  const auto s = uniform_stream(64, 2, 25, 1);
  SimulationOptions opt;
  opt.stride = 10;
  const auto res = run_simulation(s, params_for(s), opt);
  ASSERT_EQ(res.rows.size(), 4u);
  EXPECT_EQ(res.rows[0].t, 0u);
  EXPECT_EQ(res.rows[1].t, 10u);
  EXPECT_EQ(res.rows[2].t, 20u);
  EXPECT_EQ(res.rows[3].t, 24u);
  opt.stride = 0;
  EXPECT_THROW(run_simulation(s, params_for(s), opt), std::invalid_argument);
}

TEST(TraceFormatTest, HeaderAndTwelveSignificantDigits) {
  std::ostringstream os;
  write_trace(os, {{3, 1.0 / 3.0, 123456789.123456789, 4, 40, 1}});
  EXPECT_EQ(os.str(),
            "t,true_fp,estimate,cum_messages,cum_bits,fired_instances\n"
            "3,0.333333333333,123456789.123,4,40,1\n");
}

TEST(RunningMomentTest, NonIntegerOrder) {
  RunningMoment rm(4, 1.5);
  rm.add(0);
  rm.add(0);
  rm.add(1);
  EXPECT_NEAR(rm.value(), std::pow(2.0, 1.5) + 1.0, 1e-12);
}

}  // namespace
}  // namespace fpmon
