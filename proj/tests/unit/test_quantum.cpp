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
#include <numbers>
#include <sstream>

#include "bhc/classical.hpp"
#include "bhc/error.hpp"
#include "bhc/fock.hpp"
#include "bhc/quantum.hpp"
#include "oracles.hpp"

using namespace bhc;

TEST_CASE("source state is the full condensate on site 1") {
  const FockBasis b = build_basis(3, 6);
  const auto s = source_state(b);
  CHECK(s.amplitudes.norm() == doctest::Approx(1.0));
  CHECK(std::abs(s.amplitudes[0]) == 1.0);
  CHECK(b.occupation(0, 0) == 6);
}

TEST_CASE("single Krylov step equals the dense exponential") {
  const auto p = ModelParams::from_dimensionless(3, 6, 0.3, 0.1);
  const FockBasis b = build_basis(3, 6);
  const auto ops = assemble_operators(b, p);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Random(static_cast<Eigen::Index>(b.size()));
  psi.normalize();
  const Eigen::VectorXcd ref = oracle::expm_apply(ops.dense_hamiltonian(0.7), 0.2, psi);
  const double err = krylov_step(ops, 0.7, 0.2, 12, 1e-10, psi);
  CHECK(err <= 1e-10);
  CHECK((psi - ref).norm() < 1e-10);

  // A step whose error estimate misses the tolerance leaves the state alone.
  const Eigen::VectorXcd before = psi;
  const double big = krylov_step(ops, 0.7, 50.0, 4, 1e-10, psi);
  CHECK(big > 1e-10);
  CHECK(psi == before);
}

TEST_CASE("frozen Hamiltonian propagation") {
  const auto p = ModelParams::from_dimensionless(5, 3, 0.4, 0.1);
  const FockBasis b = build_basis(5, 3);
  const auto ops = assemble_operators(b, p);
  const auto init = source_state(b);
  StepControl c;
  c.sample_count = 10;
  const auto run = propagate_quantum(init, SweepProtocol::frozen(0.5, 60.0), ops, c);
  const Eigen::VectorXcd ref = oracle::expm_apply(ops.dense_hamiltonian(0.5), 60.0, init.amplitudes);
  CHECK(oracle::fidelity(run.final_state.amplitudes, ref) > 1.0 - 1e-12);
  CHECK(run.completed);
  CHECK(run.samples.size() == 11);
  // Energy is conserved under a frozen Hamiltonian.
  for (const auto& s : run.samples)
    CHECK(s.energy_per_particle == doctest::Approx(run.samples.front().energy_per_particle).epsilon(1e-10));
}

TEST_CASE("sweep agrees with a fourth-order Magnus oracle") {
  const auto p = ModelParams::from_dimensionless(3, 4, 0.2, 0.1);
  const FockBasis b = build_basis(3, 4);
  const auto ops = assemble_operators(b, p);
  const auto proto = SweepProtocol::from_exponent(1);
  const auto init = source_state(b);
  const auto run = propagate_quantum(init, proto, ops);
  const auto ref = oracle::magnus4([&](double t) { return ops.dense_hamiltonian(proto.theta_of(t)); },
                                   proto.duration(), 2000, init.amplitudes);
  CHECK(oracle::fidelity(run.final_state.amplitudes, ref) > 1.0 - 1e-9);
  CHECK(run.max_norm_error < 1e-9);
  StepControl sparse;
  sparse.sample_count = 1;
  const auto bare = propagate_quantum(init, proto, ops, sparse);
  CHECK(estimate_quantum_steps(proto, ops) == doctest::Approx(double(bare.steps)).epsilon(0.05));
}

TEST_CASE("one particle follows the linear mean-field equation") {
  const auto p = ModelParams::from_dimensionless(5, 1, 0.0, 0.1);
  const FockBasis b = build_basis(5, 1);
  const auto ops = assemble_operators(b, p);
  const auto proto = SweepProtocol::from_exponent(2);
  const auto c = integrate_trajectory(source_orbital(5), proto, p);
  const auto co = orbital_occupations(c.final_state.psi);
  // Midpoint stepping is second order in the angle step.
  double err[2] = {0.0, 0.0};
  const double steps[2] = {1e-3, 1e-4};
  for (int k = 0; k < 2; ++k) {
    StepControl ctrl;
    ctrl.theta_step = steps[k];
    const auto q = propagate_quantum(source_state(b), proto, ops, ctrl);
    const auto qo = q.samples.back().occupations;
    CHECK(transfer_efficiency_q(q) == doctest::Approx(qo[4]));
    for (int j = 0; j < 5; ++j) err[k] = std::max(err[k], std::abs(qo[j] - co[j]));
  }
  CHECK(err[0] < 1e-6);
  CHECK(err[1] < 1e-8);
  CHECK(err[1] < err[0] / 50.0);
}

TEST_CASE("level trace weights are complete") {
  const auto p = ModelParams::from_dimensionless(3, 5, 0.2, 0.1);
  const FockBasis b = build_basis(3, 5);
  const auto ops = assemble_operators(b, p);
  StepControl c;
  c.snapshot_thetas = theta_grid(11);
  const auto run = propagate_quantum(source_state(b), SweepProtocol::from_exponent(1), ops, c);
  REQUIRE(run.snapshots.size() == 11);
  const auto trace = level_overlap_trace(run, ops, 1e-3);
  REQUIRE(trace.points.size() == 11);
  for (const auto& pt : trace.points) {
    double total = pt.residual;
    for (const auto& e : pt.retained) {
      CHECK(e.weight >= 1e-3);
      CHECK(e.drain_population >= 0.0);
      CHECK(e.drain_population <= 1.0 + 1e-12);
      total += e.weight;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(trace.points.front().theta == 0.0);
  CHECK(trace.points.back().theta == doctest::Approx(kHalfPi));
  std::ostringstream out;
  write_level_trace_csv(out, trace);
  CHECK(out.str().find("theta") != std::string::npos);
}

TEST_CASE("input validation") {
  const FockBasis b = build_basis(3, 2);
  const auto ops = assemble_operators(b, ModelParams::from_dimensionless(3, 2, 0.1, 0.1));
  auto s = source_state(b);
  s.amplitudes *= 2.0;
  CHECK_THROWS_AS(propagate_quantum(s, SweepProtocol::from_exponent(1), ops), InvalidParameter);
  CHECK_THROWS_AS(theta_grid(1), InvalidParameter);
  const auto g = theta_grid(3);
  CHECK(g[1] == doctest::Approx(std::numbers::pi / 4));
}
