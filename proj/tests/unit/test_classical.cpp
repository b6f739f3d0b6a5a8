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

#include <cmath>
#include <limits>
#include <sstream>

#include "bhc/classical.hpp"
#include "bhc/error.hpp"
#include "oracles.hpp"

using namespace bhc;
using cd = std::complex<double>;

TEST_CASE("equations of motion are Hamilton's equations of the energy") {
  const auto p = ModelParams::from_dimensionless(5, 20, 0.7, -0.3);
  const Orbital psi{cd(0.5, 0.1), cd(-0.2, 0.4), cd(0.3, -0.3), cd(0.1, 0.2), cd(-0.4, 0.05)};
  const double th = 0.9;
  const auto rhs = eom_rhs(psi, th, p);
  const double h = 1e-6;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    auto shifted = [&](cd d) {
      Orbital q = psi;
      q[j] += d;
      return classical_energy(q, th, p);
    };
    const double gx = (shifted(h) - shifted(-h)) / (2 * h);
    const double gy = (shifted(cd(0, h)) - shifted(cd(0, -h))) / (2 * h);
    // i dpsi/dt = dE/dpsi* = (dE/dx + i dE/dy) / 2
    const cd expected = cd(0, -1) * cd(gx, gy) * 0.5;
    CHECK(std::abs(rhs[j] - expected) < 1e-8);
  }
}

TEST_CASE("energy of the condensate and its projections") {
  const auto p = ModelParams::from_dimensionless(3, 10, 0.5, 0.2);
  const auto src = source_orbital(3);
  CHECK(classical_energy(src, 0.3, p) == doctest::Approx(0.5 * p.g()));
  Orbital twice = src;
  for (auto& z : twice) z *= std::sqrt(2.0);
  // Per-particle energy uses the orbital's own norm.
  CHECK(energy_per_particle(twice, 0.3, p) == doctest::Approx(p.g()));
  const auto occ = orbital_occupations(Orbital{cd(1, 0), cd(0, 1), cd(1, 1)});
  CHECK(occ[2] == doctest::Approx(0.5));
}

TEST_CASE("linear sweep matches the single-particle propagator") {
  const auto p = ModelParams::from_dimensionless(3, 1, 0.0, 0.1);
  const auto proto = SweepProtocol::from_exponent(1);
  auto h1 = [&](double t) {
    const double th = proto.theta_of(t);
    oracle::Dense h = oracle::Dense::Zero(3, 3);
    h(1, 1) = p.detuning;
    h(0, 1) = h(1, 0) = -0.5 * std::sin(th);
    h(1, 2) = h(2, 1) = -0.5 * std::cos(th);
    return h;
  };
  oracle::CVec x = oracle::CVec::Zero(3);
  x[0] = 1.0;
  const auto ref = oracle::magnus4(h1, proto.duration(), 4000, x);
  const auto run = integrate_trajectory(source_orbital(3), proto, p);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(run.final_state.psi[j] - ref[j]) < 1e-9);
  CHECK(run.final_state.theta == doctest::Approx(kHalfPi));
  CHECK(run.samples.size() == 501);
}

TEST_CASE("frozen dynamics conserves norm and energy") {
  const auto p = ModelParams::from_dimensionless(5, 30, 0.4, 0.1);
  Orbital psi{cd(0.6, 0.0), cd(0.3, 0.2), cd(0.1, -0.4), cd(-0.2, 0.1), cd(0.3, 0.3)};
  const double e0 = energy_per_particle(psi, 0.8, p);
  IntegratorControl c;
  c.sample_count = 20;
  const auto run = integrate_trajectory(psi, SweepProtocol::frozen(0.8, 2000.0), p, c);
  CHECK(run.max_norm_error < 1e-10);
  for (const auto& s : run.samples) CHECK(std::abs(s.energy_per_particle - e0) < 1e-9 * std::abs(e0));
}

TEST_CASE("adaptive and fixed steps agree") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.4, 0.1);
  ClassicalIntegrator it(p, SweepProtocol::from_exponent(1));
  Orbital psi = source_orbital(3);
  double t = 0.0;
  std::size_t seen = 0;
  it.advance(psi, t, 0.05, [&](double, const Orbital&) { ++seen; });
  CHECK(t == 0.05);
  CHECK(seen == it.steps());
  const Orbital fixed = it.step_fixed(source_orbital(3), 0.0, 0.05);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(fixed[j] - psi[j]) < 1e-12);
}

TEST_CASE("linear adiabatic passage is complete at a slow rate") {
  const auto p = ModelParams::from_dimensionless(3, 30, 0.0, 0.1);
  CHECK(mft_efficiency(SweepProtocol::from_exponent(3), p) > 0.99);
}

TEST_CASE("invalid inputs") {
  const auto p = ModelParams::from_dimensionless(3, 1, 0.0, 0.1);
  CHECK_THROWS_AS(integrate_trajectory(Orbital(3, 0.0), SweepProtocol::from_exponent(1), p),
                  InvalidParameter);
  CHECK_THROWS_AS(integrate_trajectory(source_orbital(4), SweepProtocol::from_exponent(1), p),
                  InvalidParameter);
  IntegratorControl bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(ClassicalIntegrator(p, SweepProtocol::from_exponent(1), bad), InvalidParameter);
  Orbital nan_psi = source_orbital(3);
  nan_psi[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(integrate_trajectory(nan_psi, SweepProtocol::from_exponent(1), p), Error);
}

TEST_CASE("trajectory csv layout") {
  const auto p = ModelParams::from_dimensionless(3, 1, 0.0, 0.1);
  IntegratorControl c;
  c.sample_count = 4;
  std::ostringstream out;
  write_classical_csv(out, integrate_trajectory(source_orbital(3), SweepProtocol::from_exponent(0), p, c), 3);
  const std::string s = out.str();
  CHECK(s.rfind("#", 0) == 0);
  std::size_t lines = 0;
  for (char ch : s) lines += ch == '\n';
  CHECK(lines == 1 + 1 + 5);
}
