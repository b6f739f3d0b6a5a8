// Copyright 2026 The bhc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bhc/classical.hpp"
#include "bhc/error.hpp"
#include "bhc/twa.hpp"

using namespace bhc;

namespace {

// E/n of one amplitude sample at theta = 0, written out in alpha units for a
// three-site chain: only the 2-3 bond is open.
double oracle_energy(const std::complex<double> a[3], double U, double V, double K) {
  double n = 0.0, quartic = 0.0;
  for (int j = 0; j < 3; ++j) {
    n += std::norm(a[j]);
    quartic += std::norm(a[j]) * std::norm(a[j]);
  }
  const double e = 0.5 * U * quartic + V * std::norm(a[1]) - K * (std::conj(a[2]) * a[1]).real();
  return e / n;
}

double oracle_epsilon(const ModelParams& p, double w, int samples) {
  std::mt19937 rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double s = 0.0, ss = 0.0;
  for (int k = 0; k < samples; ++k) {
    std::complex<double> a[3];
    for (int j = 0; j < 3; ++j) {
      const double x = gauss(rng), y = gauss(rng);
      a[j] = std::complex<double>(x, y) * (w / std::sqrt(2.0));
    }
    a[0] += std::sqrt(double(p.particles));
    const double e = oracle_energy(a, p.interaction, p.detuning, p.hopping);
    s += e;
    ss += e * e;
  }
  const double mean = s / samples;
  return std::sqrt((ss / samples - mean * mean) * samples / (samples - 1.0));
}

}  // namespace

TEST_CASE("zero width collapses the cloud") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.2, 0.1);
  const Cloud c = sample_cloud(p, 50, 0.0, 7);
  CHECK(c.epsilon == 0.0);
  for (const auto& s : c.seeds) CHECK(s == source_orbital(3));
}

TEST_CASE("seed moments") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.0, 0.0);
  const int n = 20000;
  const double w = 1.0;
  const Cloud c = sample_cloud(p, n, w, 11);
  // alpha_1 = sqrt(N) + w (xi + i eta)/sqrt(2): E alpha_1 = sqrt(N), E |alpha_j - <alpha_j>|^2 = w^2.
  std::vector<double> re1, dev2, n1;
  for (const auto& s : c.seeds) {
    const auto a1 = s[0] * std::sqrt(30.0);
    re1.push_back(a1.real());
    dev2.push_back(std::norm(s[2] * std::sqrt(30.0)));
    n1.push_back(std::norm(a1) / 30.0);
  }
  auto within = [](const std::vector<double>& v, double expected) {
    const auto [m, se] = mean_stderr(v);
    return std::abs(m - expected) < 3.0 * se;
  };
  CHECK(within(re1, std::sqrt(30.0)));
  CHECK(within(dev2, w * w));
  CHECK(within(n1, 1.0 + w * w / 30.0));
}

TEST_CASE("energy width against a Monte-Carlo oracle") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.2, 0.1);
  const double ref = oracle_epsilon(p, 1.0, 1000000);
  const Cloud c = sample_cloud(p, 20000, 1.0, 3);
  CHECK(c.epsilon == doctest::Approx(ref).epsilon(0.02));
}

TEST_CASE("sampling is reproducible and index addressable") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.2, 0.1);
  const Cloud a = sample_cloud(p, 40, 1.0, 99);
  const Cloud b = sample_cloud(p, 40, 1.0, 99);
  CHECK(a.seeds == b.seeds);
  CHECK(sample_seed(p, 1.0, 99, 17) == a.seeds[17]);
  CHECK(sample_cloud(p, 40, 1.0, 100).seeds != a.seeds);
  CHECK_THROWS_AS(sample_cloud(p, 0, 1.0, 1), InvalidParameter);
  CHECK_THROWS_AS(sample_cloud(p, 5, -1.0, 1), InvalidParameter);
}

TEST_CASE("width calibration") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.2, 0.1);
  CHECK(calibrate_width(p, 0.0, 200, 5) == 0.0);
  double last = 0.0;
  for (double w : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double e = sample_cloud(p, 400, w, 5).epsilon;
    CHECK(e >= last);
    last = e;
  }
  const double target = 0.02;
  const double w = calibrate_width(p, target, 400, 5);
  CHECK(sample_cloud(p, 400, w, 5).epsilon == doctest::Approx(target).epsilon(0.01));
  CHECK_THROWS_AS(calibrate_width(p, 100.0, 100, 5), RangeError);
  CHECK_THROWS_AS(calibrate_width(p, -1.0, 100, 5), InvalidParameter);
}

TEST_CASE("degenerate cloud reproduces the mean-field trajectory") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.4, 0.1);
  const auto proto = SweepProtocol::from_exponent(1);
  const auto mft = integrate_trajectory(source_orbital(3), proto, p);
  const auto run = propagate_cloud(sample_cloud(p, 8, 0.0, 1), proto, p);
  REQUIRE(run.samples.size() == mft.samples.size());
  for (std::size_t k = 0; k < mft.samples.size(); ++k)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(run.samples[k].occupations[j] - mft.samples[k].occupations[j]) < 1e-12);
  CHECK(run.stderr_drain < 1e-14);
}

TEST_CASE("results do not depend on the worker count") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.4, 0.1);
  const auto proto = SweepProtocol::from_exponent(1);
  const Cloud c = sample_cloud(p, 70, 1.0, 21);
  CloudControl one, three;
  one.workers = 1;
  three.workers = 3;
  three.chunk = 64;
  const auto a = propagate_cloud(c, proto, p, one);
  const auto b = propagate_cloud(c, proto, p, three);
  CHECK(a.p_drain == b.p_drain);
  CHECK(a.stderr_drain == b.stderr_drain);
  CHECK(a.drain == b.drain);
  for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].occupations == b.samples[k].occupations);
  const auto [m, se] = mean_stderr(a.drain);
  CHECK(a.p_drain == doctest::Approx(m).epsilon(1e-14));
  CHECK(a.stderr_drain == doctest::Approx(se).epsilon(1e-12));
}

TEST_CASE("failures report the first failing trajectory") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.4, 0.1);
  CloudControl c;
  c.integrator.norm_drift_limit = -1.0;
  c.workers = 2;
  try {
    propagate_cloud(sample_cloud(p, 6, 1.0, 1), SweepProtocol::from_exponent(0), p, c);
    FAIL("expected a trajectory error");
  } catch (const TrajectoryError& e) {
    CHECK(e.index() == 0);
    CHECK(std::string(e.what()).find("trajectory 0") != std::string::npos);
  }

  std::atomic<int> ran{0};
  CHECK_THROWS_WITH(parallel_for(10, 3,
                                 [&](std::size_t i) {
                                   ++ran;
                                   if (i == 4 || i == 7) throw std::runtime_error("bad " + std::to_string(i));
                                 }),
                    "bad 4");
}

TEST_CASE("mean and standard error") {
  const auto [m, se] = mean_stderr({1.0, 2.0, 3.0, 4.0});
  CHECK(m == 2.5);
  CHECK(se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK_THROWS_AS(mean_stderr({}), StatisticsError);
}

TEST_CASE("epsilon table and writers") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.2, 0.1);
  const auto rows = efficiency_vs_epsilon(p, SweepProtocol::from_exponent(0), {0.005, 0.01}, 40, 3);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].plateau);
  CHECK(rows[1].epsilon == doctest::Approx(0.01).epsilon(0.01));
  CHECK(rows[1].plateau == (std::abs(rows[1].p_drain - rows[0].p_drain) <
                            2.0 * std::hypot(rows[0].stderr_drain, rows[1].stderr_drain)));
  std::ostringstream eps, cloud;
  write_epsilon_csv(eps, rows);
  CHECK(eps.str().find("epsilon") != std::string::npos);
  write_cloud_csv(cloud, sample_cloud(p, 3, 1.0, 3).seeds, 30);
  CHECK(cloud.str().find("traj_index,re_alpha1,im_alpha1") != std::string::npos);
}
