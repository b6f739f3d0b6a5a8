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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "bhc/error.hpp"
#include "bhc/fock.hpp"
#include "oracles.hpp"

using namespace bhc;
using oracle::enumerate;
using oracle::Occ;
using oracle::oracle_hamiltonian;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("basis matches brute-force enumeration in descending order") {
  for (int m : {2, 3, 4, 5})
    for (int n : {1, 2, 3, 6}) {
      const auto ref = enumerate(m, n);
      const FockBasis b = build_basis(m, n);
      REQUIRE(b.size() == ref.size());
      CHECK(double(basis_dimension(m, n)) == binomial(n + m - 1, m - 1));
      for (std::size_t i = 0; i < ref.size(); ++i) {
        const auto s = b.state(i);
        CHECK(Occ(s.begin(), s.end()) == ref[i]);
        CHECK(*b.index_of(ref[i]) == i);
      }
    }
}

TEST_CASE("index lookup rejects foreign sectors") {
  const FockBasis b = build_basis(3, 4);
  CHECK_FALSE(b.index_of(Occ{1, 1, 1}).has_value());
  CHECK_FALSE(b.index_of(Occ{4, 0}).has_value());
  CHECK_FALSE(b.index_of(Occ{5, -1, 0}).has_value());
}

TEST_CASE("capacity guard") {
  CHECK_THROWS_AS(build_basis(5, 40, 1000), CapacityError);
  CHECK_NOTHROW(build_basis(3, 30));
  const FockBasis b = build_basis(3, 4);
  const auto ops = assemble_operators(b, ModelParams::from_dimensionless(3, 4, 0.2, 0.1));
  CHECK_THROWS_AS(instantaneous_spectrum(0.3, ops, 5), CapacityError);
}

TEST_CASE("sparse pieces reproduce the second-quantized Hamiltonian") {
  for (int m : {3, 5})
    for (int n : {1, 3, 4}) {
      ModelParams p;
      p.sites = m;
      p.particles = n;
      p.interaction = 0.37;
      p.detuning = -0.21;
      p.hopping = 1.3;
      const auto states = enumerate(m, n);
      const auto ops = assemble_operators(build_basis(m, n), p);
      for (double th : {0.0, 0.4, 1.2, std::numbers::pi / 2}) {
        const Eigen::MatrixXd ref = oracle_hamiltonian(states, p, th);
        CHECK((ops.dense_hamiltonian(th) - ref).norm() < 1e-13);
        CHECK((Eigen::MatrixXd(ops.hamiltonian(th)) - ref).norm() < 1e-13);

        Eigen::VectorXcd x = Eigen::VectorXcd::Random(ref.rows());
        Eigen::VectorXcd y(ref.rows());
        ops.apply(th, x, y);
        CHECK((y - ref.cast<std::complex<double>>() * x).norm() < 1e-12 * x.norm());
        CHECK(ops.norm_bound(th) >= ref.selfadjointView<Eigen::Lower>().eigenvalues().cwiseAbs().maxCoeff() - 1e-12);
      }
    }
}

TEST_CASE("site reversal maps H(theta) to H(pi/2 - theta)") {
  for (int m : {3, 5})
    for (int n : {1, 3}) {
      ModelParams p;
      p.sites = m;
      p.particles = n;
      p.interaction = 0.3;
      p.detuning = 0.2;
      const FockBasis b = build_basis(m, n);
      const auto ops = assemble_operators(b, p);
      const Eigen::MatrixXd r = Eigen::MatrixXd(site_reversal(b));
      CHECK((r * r.transpose() - Eigen::MatrixXd::Identity(r.rows(), r.cols())).norm() == 0.0);
      // Piecewise the identity is exact: reversal swaps odd and even bonds
      // and fixes the diagonal.
      const RowSparse ro = site_reversal(b) * ops.hop_odd * RowSparse(site_reversal(b).transpose());
      CHECK((Eigen::MatrixXd(ro) - Eigen::MatrixXd(ops.hop_even)).cwiseAbs().maxCoeff() == 0.0);
      const Eigen::VectorXd d = ops.interaction_diag + ops.detuning_diag;
      CHECK((r * d - d).cwiseAbs().maxCoeff() == 0.0);
      // Assembled, sin(pi/2 - theta) and cos(theta) may differ in the last bit.
      for (double th : {0.1, 0.5, 0.9})
        CHECK((r * ops.dense_hamiltonian(th) * r.transpose() -
               ops.dense_hamiltonian(std::numbers::pi / 2 - th))
                  .cwiseAbs()
                  .maxCoeff() <= 4e-16);
    }
}

TEST_CASE("single particle spectrum is the hopping matrix spectrum") {
  ModelParams p;
  p.sites = 5;
  p.particles = 1;
  p.detuning = 0.15;
  const double th = 0.6;
  const auto spec = instantaneous_spectrum(th, p, build_basis(5, 1));
  Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(5, 5);
  h1(2, 2) = 0.15;
  for (int j = 0; j < 4; ++j)
    h1(j, j + 1) = h1(j + 1, j) = -0.5 * (j % 2 == 0 ? std::sin(th) : std::cos(th));
  const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h1).eigenvalues();
  CHECK((spec.energies - ref).norm() < 1e-13);
}

TEST_CASE("occupation expectation of a basis state") {
  const FockBasis b = build_basis(3, 5);
  const auto ops = assemble_operators(b, ModelParams{3, 5, 0.0, 0.0, 1.0});
  const Occ target{2, 1, 2};
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b.size()));
  psi[static_cast<Eigen::Index>(*b.index_of(target))] = 1.0;
  const auto occ = occupations(psi, b);
  const auto occ2 = occupations(psi, ops);
  CHECK_THROWS_AS(occupations(Eigen::VectorXcd(2.0 * psi), b), StaleStateError);
  for (int j = 0; j < 3; ++j) {
    CHECK(occ[j] == doctest::Approx(target[j] / 5.0));
    CHECK(occ2[j] == doctest::Approx(target[j] / 5.0));
  }
}

TEST_CASE("basis and operator dumps") {
  const FockBasis b = build_basis(3, 2);
  std::ostringstream out;
  write_basis(out, b);
  CHECK(out.str().find("2 0 0\n") != std::string::npos);
  CHECK(out.str().find("0 0 2\n") != std::string::npos);
  std::ostringstream ops;
  write_operators(ops, assemble_operators(b, ModelParams{3, 2, 0.1, 0.2, 1.0}));
  CHECK(ops.str().find("# piece D_U") != std::string::npos);
}
