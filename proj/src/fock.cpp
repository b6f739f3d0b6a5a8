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

#include "bhc/fock.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <ostream>

#include "bhc/error.hpp"

namespace bhc {

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t saturating_binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // C(n, i) = C(n, i-1) * (n - i + 1) / i stays integral at every step.
  unsigned __int128 acc = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    acc = acc * (n - i + 1) / i;
    if (acc > kSaturated) return kSaturated;
  }
  return static_cast<std::size_t>(acc);
}

}  // namespace

std::size_t basis_dimension(int sites, int particles) {
  if (sites < 1 || particles < 0) return 0;
  return saturating_binomial(static_cast<std::size_t>(particles + sites - 1),
                             static_cast<std::size_t>(sites - 1));
}

FockBasis::FockBasis(int sites, int particles, std::size_t cap)
    : sites_(sites), particles_(particles) {
  if (sites < 2) throw InvalidParameter("basis needs M >= 2");
  if (particles < 1) throw InvalidParameter("basis needs N >= 1");
  if (particles > std::numeric_limits<std::uint16_t>::max())
    throw InvalidParameter("particle number too large for occupation storage");
  size_ = basis_dimension(sites, particles);
  if (size_ > cap) throw CapacityError("Fock basis too large", size_, cap);

  ways_.assign(static_cast<std::size_t>(sites) + 1,
               std::vector<std::size_t>(static_cast<std::size_t>(particles) + 1, 0));
  for (int k = 1; k <= sites; ++k)
    for (int n = 0; n <= particles; ++n)
      ways_[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] = basis_dimension(k, n);

  const auto m = static_cast<std::size_t>(sites);
  occ_.resize(size_ * m);
  std::vector<int> cur(m, 0);
  cur[0] = particles;
  for (std::size_t idx = 0; idx < size_; ++idx) {
    for (std::size_t j = 0; j < m; ++j) occ_[idx * m + j] = static_cast<std::uint16_t>(cur[j]);
    // Descending-lexicographic successor: move one boson out of the rightmost
    // occupied site k < M-1 and gather everything behind it on site k+1.
    int k = sites - 2;
    while (k >= 0 && cur[static_cast<std::size_t>(k)] == 0) --k;
    if (k < 0) break;
    int tail = 0;
    for (std::size_t j = static_cast<std::size_t>(k) + 1; j < m; ++j) {
      tail += cur[j];
      cur[j] = 0;
    }
    cur[static_cast<std::size_t>(k)] -= 1;
    cur[static_cast<std::size_t>(k) + 1] = tail + 1;
  }
}

std::size_t FockBasis::rank(std::span<const int> occupations) const {
  std::size_t index = 0;
  int remaining = particles_;
  for (int j = 0; j + 1 < sites_; ++j) {
    const int n = occupations[static_cast<std::size_t>(j)];
    // States with a larger occupation at site j precede this one; there are
    // ways(remaining - n - 1, M - j) of them (hockey-stick identity).
    if (n < remaining)
      index += ways_[static_cast<std::size_t>(sites_ - j)]
                    [static_cast<std::size_t>(remaining - n - 1)];
    remaining -= n;
  }
  return index;
}

std::optional<std::size_t> FockBasis::index_of(std::span<const int> occupations) const {
  if (occupations.size() != static_cast<std::size_t>(sites_)) return std::nullopt;
  int total = 0;
  for (int n : occupations) {
    if (n < 0) return std::nullopt;
    total += n;
  }
  if (total != particles_) return std::nullopt;
  return rank(occupations);
}

std::size_t FockBasis::reversed_index(std::size_t index) const {
  std::vector<int> rev(static_cast<std::size_t>(sites_));
  const auto s = state(index);
  for (std::size_t j = 0; j < rev.size(); ++j) rev[j] = s[rev.size() - 1 - j];
  return rank(rev);
}

FockBasis build_basis(int sites, int particles, std::size_t cap) {
  return FockBasis(sites, particles, cap);
}

FockOperatorSet assemble_operators(const FockBasis& basis, const ModelParams& params) {
  params.validate();
  if (params.sites != basis.sites() || params.particles != basis.particles())
    throw InvalidParameter("assemble_operators: basis does not match parameters");

  const std::size_t dim = basis.size();
  const int m = basis.sites();
  const int mid = middle_site(m);
  FockOperatorSet ops;
  ops.hopping = params.hopping;
  ops.particles = params.particles;
  ops.interaction_diag.resize(static_cast<Eigen::Index>(dim));
  ops.detuning_diag.resize(static_cast<Eigen::Index>(dim));
  ops.site_occupation.assign(static_cast<std::size_t>(m), Eigen::VectorXd(dim));

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> odd, even;
  odd.reserve(dim * static_cast<std::size_t>(m));
  even.reserve(dim * static_cast<std::size_t>(m));

  std::vector<int> work(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < dim; ++i) {
    const auto s = basis.state(i);
    double eu = 0.0;
    for (int j = 0; j < m; ++j) {
      const double n = s[static_cast<std::size_t>(j)];
      eu += 0.5 * params.interaction * n * (n - 1.0);
      ops.site_occupation[static_cast<std::size_t>(j)](static_cast<Eigen::Index>(i)) = n;
    }
    ops.interaction_diag(static_cast<Eigen::Index>(i)) = eu;
    ops.detuning_diag(static_cast<Eigen::Index>(i)) =
        params.detuning * s[static_cast<std::size_t>(mid)];

    for (int b = 0; b + 1 < m; ++b) {
      auto& target = (b % 2 == 0) ? odd : even;
      const int nj = s[static_cast<std::size_t>(b)];
      const int nk = s[static_cast<std::size_t>(b) + 1];
      for (std::size_t j = 0; j < work.size(); ++j) work[j] = s[j];
      // a+_{j+1} a_j: <s - e_j + e_{j+1}| ... |s> = sqrt(n_j (n_{j+1} + 1)).
      if (nj > 0) {
        work[static_cast<std::size_t>(b)] -= 1;
        work[static_cast<std::size_t>(b) + 1] += 1;
        const auto col = *basis.index_of(work);
        target.emplace_back(static_cast<int>(col), static_cast<int>(i),
                            std::sqrt(static_cast<double>(nj) * (nk + 1)));
        target.emplace_back(static_cast<int>(i), static_cast<int>(col),
                            std::sqrt(static_cast<double>(nj) * (nk + 1)));
      }
    }
  }
  ops.hop_odd.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  ops.hop_even.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  ops.hop_odd.setFromTriplets(odd.begin(), odd.end());
  ops.hop_even.setFromTriplets(even.begin(), even.end());
  ops.hop_odd.makeCompressed();
  ops.hop_even.makeCompressed();

  auto row_sums = [](const RowSparse& a) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(a.rows());
    for (Eigen::Index i = 0; i < a.outerSize(); ++i)
      for (RowSparse::InnerIterator it(a, i); it; ++it) r(i) += std::abs(it.value());
    return r;
  };
  ops.odd_row_sums = row_sums(ops.hop_odd);
  ops.even_row_sums = row_sums(ops.hop_even);
  return ops;
}

void FockOperatorSet::apply(double theta, Eigen::Ref<const ComplexVector> x,
                            Eigen::Ref<ComplexVector> y) const {
  const double cs = -0.5 * hopping * std::sin(theta);
  const double cc = -0.5 * hopping * std::cos(theta);
  const Eigen::Index dim = interaction_diag.size();
  const int* op = hop_odd.outerIndexPtr();
  const int* oi = hop_odd.innerIndexPtr();
  const double* ov = hop_odd.valuePtr();
  const int* ep = hop_even.outerIndexPtr();
  const int* ei = hop_even.innerIndexPtr();
  const double* ev = hop_even.valuePtr();
  for (Eigen::Index r = 0; r < dim; ++r) {
    std::complex<double> odd_acc = 0.0;
    for (int k = op[r]; k < op[r + 1]; ++k) odd_acc += ov[k] * x[oi[k]];
    std::complex<double> even_acc = 0.0;
    for (int k = ep[r]; k < ep[r + 1]; ++k) even_acc += ev[k] * x[ei[k]];
    y[r] = (interaction_diag[r] + detuning_diag[r]) * x[r] + cs * odd_acc + cc * even_acc;
  }
}

double FockOperatorSet::norm_bound(double theta) const {
  const double s = 0.5 * hopping * std::abs(std::sin(theta));
  const double c = 0.5 * hopping * std::abs(std::cos(theta));
  double best = 0.0;
  for (Eigen::Index r = 0; r < interaction_diag.size(); ++r)
    best = std::max(best, std::abs(interaction_diag[r] + detuning_diag[r]) +
                              s * odd_row_sums[r] + c * even_row_sums[r]);
  return best;
}

RowSparse FockOperatorSet::hamiltonian(double theta) const {
  RowSparse diag(interaction_diag.size(), interaction_diag.size());
  diag.reserve(Eigen::VectorXi::Constant(interaction_diag.size(), 1));
  for (Eigen::Index i = 0; i < interaction_diag.size(); ++i)
    diag.insert(i, i) = interaction_diag[i] + detuning_diag[i];
  RowSparse h = diag - (0.5 * hopping * std::sin(theta)) * hop_odd -
                (0.5 * hopping * std::cos(theta)) * hop_even;
  h.makeCompressed();
  return h;
}

Eigen::MatrixXd FockOperatorSet::dense_hamiltonian(double theta) const {
  return Eigen::MatrixXd(hamiltonian(theta));
}

std::vector<double> occupations(const ComplexVector& state, const FockOperatorSet& ops) {
  const double norm2 = state.squaredNorm();
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6)
    throw StaleStateError("occupations: state norm deviates from 1 by more than 1e-6");
  std::vector<double> out(ops.site_occupation.size());
  const Eigen::VectorXd prob = state.cwiseAbs2();
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = prob.dot(ops.site_occupation[j]) / (norm2 * ops.particles);
  return out;
}

std::vector<double> occupations(const ComplexVector& state, const FockBasis& basis) {
  if (static_cast<std::size_t>(state.size()) != basis.size())
    throw InvalidParameter("occupations: state length does not match basis");
  const double norm2 = state.squaredNorm();
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6)
    throw StaleStateError("occupations: state norm deviates from 1 by more than 1e-6");
  std::vector<double> out(static_cast<std::size_t>(basis.sites()), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double p = std::norm(state[static_cast<Eigen::Index>(i)]);
    const auto s = basis.state(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += p * s[j];
  }
  for (double& x : out) x /= norm2 * basis.particles();
  return out;
}

Spectrum instantaneous_spectrum(double theta, const FockOperatorSet& ops, std::size_t cap) {
  if (ops.dimension() > cap)
    throw CapacityError("dense spectrum too large; a sparse interior eigensolver is required",
                        ops.dimension(), cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ops.dense_hamiltonian(theta));
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("dense eigensolver failed", theta);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Spectrum instantaneous_spectrum(double theta, const ModelParams& params, const FockBasis& basis,
                                std::size_t cap) {
  if (basis.size() > cap)
    throw CapacityError("dense spectrum too large; a sparse interior eigensolver is required",
                        basis.size(), cap);
  return instantaneous_spectrum(theta, assemble_operators(basis, params), cap);
}

RowSparse site_reversal(const FockBasis& basis) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  RowSparse r(dim, dim);
  r.reserve(Eigen::VectorXi::Constant(dim, 1));
  for (std::size_t i = 0; i < basis.size(); ++i)
    r.insert(static_cast<Eigen::Index>(basis.reversed_index(i)), static_cast<Eigen::Index>(i)) =
        1.0;
  r.makeCompressed();
  return r;
}

void write_basis(std::ostream& out, const FockBasis& basis) {
  out << "# fock basis M=" << basis.sites() << " N=" << basis.particles()
      << " dimension=" << basis.size() << "\n";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto s = basis.state(i);
    for (std::size_t j = 0; j < s.size(); ++j) out << (j ? " " : "") << s[j];
    out << "\n";
  }
}

void write_operators(std::ostream& out, const FockOperatorSet& ops) {
  const auto old_precision = out.precision(17);
  out << "# piece D_U\n";
  for (Eigen::Index i = 0; i < ops.interaction_diag.size(); ++i)
    out << i << " " << i << " " << ops.interaction_diag[i] << "\n";
  out << "# piece D_V\n";
  for (Eigen::Index i = 0; i < ops.detuning_diag.size(); ++i)
    out << i << " " << i << " " << ops.detuning_diag[i] << "\n";
  auto dump = [&out](const char* name, const RowSparse& a) {
    out << "# piece " << name << "\n";
    for (Eigen::Index i = 0; i < a.outerSize(); ++i)
      for (RowSparse::InnerIterator it(a, i); it; ++it)
        out << it.row() << " " << it.col() << " " << it.value() << "\n";
  };
  dump("A_odd", ops.hop_odd);
  dump("A_even", ops.hop_even);
  out.precision(old_precision);
}

}  // namespace bhc
