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

#ifndef BHC_FOCK_HPP
#define BHC_FOCK_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bhc/model.hpp"

namespace bhc {

using ComplexVector = Eigen::VectorXcd;
using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// C(N+M-1, M-1), saturating at SIZE_MAX.
std::size_t basis_dimension(int sites, int particles);

/// Fixed-N Fock basis of an M-site chain.
///
/// States are ordered descending-lexicographically, so index 0 is
/// (N, 0, ..., 0) and the last index is (0, ..., 0, N). The index map is the
/// combinatorial ranking of that order, evaluated in O(M).
class FockBasis {
 public:
  static constexpr std::size_t kDefaultCap = 500000;

  FockBasis(int sites, int particles, std::size_t cap = kDefaultCap);

  int sites() const { return sites_; }
  int particles() const { return particles_; }
  std::size_t size() const { return size_; }

  std::span<const std::uint16_t> state(std::size_t index) const {
    return {occ_.data() + index * static_cast<std::size_t>(sites_),
            static_cast<std::size_t>(sites_)};
  }
  int occupation(std::size_t index, int site) const {
    return occ_[index * static_cast<std::size_t>(sites_) + static_cast<std::size_t>(site)];
  }

  /// Index of an occupation vector, or nullopt if it is not in this sector.
  std::optional<std::size_t> index_of(std::span<const int> occupations) const;

  /// Index of the site-reversed partner of state `index`.
  std::size_t reversed_index(std::size_t index) const;

 private:
  std::size_t rank(std::span<const int> occupations) const;

  int sites_;
  int particles_;
  std::size_t size_;
  std::vector<std::uint16_t> occ_;
  // ways_[k][n]: number of ways to put n bosons on k sites.
  std::vector<std::vector<std::size_t>> ways_;
};

/// build_basis(M, N); throws CapacityError above `cap`.
FockBasis build_basis(int sites, int particles, std::size_t cap = FockBasis::kDefaultCap);

/// theta-independent pieces of the chain Hamiltonian,
///   H(theta) = D_U + D_V - sin(theta) K/2 A_odd - cos(theta) K/2 A_even.
struct FockOperatorSet {
  Eigen::VectorXd interaction_diag;  // sum_j U/2 n_j (n_j - 1)
  Eigen::VectorXd detuning_diag;     // V n_mid
  RowSparse hop_odd;                 // sum over odd bonds of a+_{j+1} a_j + h.c.
  RowSparse hop_even;
  std::vector<Eigen::VectorXd> site_occupation;  // n_j on the diagonal, per site
  double hopping = 1.0;
  int particles = 1;

  std::size_t dimension() const { return static_cast<std::size_t>(interaction_diag.size()); }

  /// y = H(theta) x; y must already have the basis dimension.
  void apply(double theta, Eigen::Ref<const ComplexVector> x, Eigen::Ref<ComplexVector> y) const;

  /// Gershgorin bound on ||H(theta)||_2.
  double norm_bound(double theta) const;

  RowSparse hamiltonian(double theta) const;
  Eigen::MatrixXd dense_hamiltonian(double theta) const;

  // Per-row absolute sums of the hopping pieces, used by norm_bound.
  Eigen::VectorXd odd_row_sums;
  Eigen::VectorXd even_row_sums;
};

FockOperatorSet assemble_operators(const FockBasis& basis, const ModelParams& params);

/// (<n_1>, ..., <n_M>) / N for the state. Expectations are taken in the
/// normalized state; throws StaleStateError if | ||psi|| - 1 | > 1e-6.
std::vector<double> occupations(const ComplexVector& state, const FockBasis& basis);

/// Same, using the diagonal occupation operators of an assembled set.
std::vector<double> occupations(const ComplexVector& state, const FockOperatorSet& ops);

struct Spectrum {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd vectors;   // columns, orthonormal
};

inline constexpr std::size_t kDenseSpectrumCap = 5000;

/// Dense diagonalization of H(theta). Throws CapacityError above `cap`.
Spectrum instantaneous_spectrum(double theta, const FockOperatorSet& ops,
                                std::size_t cap = kDenseSpectrumCap);
Spectrum instantaneous_spectrum(double theta, const ModelParams& params, const FockBasis& basis,
                                std::size_t cap = kDenseSpectrumCap);

/// Site-reversal permutation lifted to Fock space, as a sparse matrix R.
RowSparse site_reversal(const FockBasis& basis);

/// Debug dumps. Basis: one state per line, occupations separated by spaces.
/// Operators: `# piece <name>` headers followed by `row col value` lines.
void write_basis(std::ostream& out, const FockBasis& basis);
void write_operators(std::ostream& out, const FockOperatorSet& ops);

}  // namespace bhc

#endif  // BHC_FOCK_HPP
