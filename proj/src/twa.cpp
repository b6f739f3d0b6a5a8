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

#include "bhc/twa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "bhc/csv.hpp"

namespace bhc {

Orbital sample_seed(const ModelParams& params, double width, std::uint64_t seed,
                    std::size_t index) {
  if (!(width >= 0.0)) throw InvalidParameter("cloud width must be >= 0");
  Orbital psi = source_orbital(params.sites);
  if (width == 0.0) return psi;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  const double scale = width / std::sqrt(2.0 * params.particles);
  for (auto& z : psi) {
    const double xi = normal(rng);
    const double eta = normal(rng);
    z += scale * std::complex<double>(xi, eta);
  }
  return psi;
}

Cloud sample_cloud(const ModelParams& params, int n_traj, double width, std::uint64_t seed) {
  params.validate();
  if (n_traj < 1) throw InvalidParameter("n_traj must be >= 1");
  Cloud cloud;
  cloud.width = width;
  cloud.seed = seed;
  cloud.particles = params.particles;
  cloud.seeds.reserve(static_cast<std::size_t>(n_traj));
  for (int i = 0; i < n_traj; ++i)
    cloud.seeds.push_back(sample_seed(params, width, seed, static_cast<std::size_t>(i)));
  cloud.epsilon = cloud_epsilon(cloud.seeds, params);
  return cloud;
}

std::pair<double, double> mean_stderr(const std::vector<double>& values) {
  if (values.empty()) throw StatisticsError("mean of an empty sample");
  // Shifted by the first value, so a constant sample has exactly zero spread.
  const double shift = values.front();
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (double x : values) d += x - shift;
  d /= n;
  if (values.size() < 2) return {shift + d, 0.0};
  double ss = 0.0;
  for (double x : values) ss += (x - shift - d) * (x - shift - d);
  return {shift + d, std::sqrt(ss / (n - 1.0) / n)};
}

double cloud_epsilon(const std::vector<Orbital>& seeds, const ModelParams& params) {
  if (seeds.size() < 2) return 0.0;
  std::vector<double> e;
  e.reserve(seeds.size());
  for (const auto& s : seeds) e.push_back(energy_per_particle(s, 0.0, params));
  const auto [mean, se] = mean_stderr(e);
  (void)mean;
  return se * std::sqrt(static_cast<double>(e.size()));
}

double calibrate_width(const ModelParams& params, double target_epsilon, int n_traj,
                       std::uint64_t seed, double w_max) {
  if (!(target_epsilon >= 0.0)) throw InvalidParameter("target epsilon must be >= 0");
  if (target_epsilon == 0.0) return 0.0;
  auto eps = [&](double w) { return sample_cloud(params, n_traj, w, seed).epsilon; };
  const double top = eps(w_max);
  if (top < target_epsilon * 0.99)
    throw RangeError("target epsilon " + csv::num(target_epsilon) +
                     " unreachable; epsilon(w_max) = " + csv::num(top));
  double lo = 0.0;
  double hi = w_max;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double e = eps(mid);
    if (std::abs(e - target_epsilon) <= 0.01 * target_epsilon) return mid;
    (e < target_epsilon ? lo : hi) = mid;
  }
  throw RangeError("width calibration did not converge for epsilon " + csv::num(target_epsilon));
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f) {
  const unsigned nw = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), n));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (unsigned k = 0; k < nw; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

// Per-trajectory record at each sample: occupations, E/N, norm error.
struct TrajectoryRecord {
  std::vector<double> values;  // (sample_count + 1) x (M + 2)
  Orbital final_psi;
};

TrajectoryRecord run_one(const Orbital& seed, const SweepProtocol& protocol,
                         const ModelParams& params, const CloudControl& ctrl, std::size_t index) {
  const std::size_t m = static_cast<std::size_t>(params.sites);
  const int count = ctrl.sample_count;
  TrajectoryRecord rec;
  rec.values.reserve(static_cast<std::size_t>(count + 1) * (m + 2));
  const double norm0 = orbital_norm2(seed);
  if (!(norm0 > 0.0)) throw InvalidParameter("zero-norm seed in cloud");
  ClassicalIntegrator integrator(params, protocol, ctrl.integrator);
  Orbital psi = seed;
  double t = 0.0;
  const double total = protocol.duration();
  auto record = [&] {
    const double theta = protocol.theta_of(t);
    const auto occ = orbital_occupations(psi);
    rec.values.insert(rec.values.end(), occ.begin(), occ.end());
    rec.values.push_back(energy_per_particle(psi, theta, params));
    const double err = std::abs(std::sqrt(orbital_norm2(psi) / norm0) - 1.0);
    if (err > ctrl.integrator.norm_drift_limit)
      throw IntegrationError("classical norm drift " + csv::num(err) + " exceeds limit", theta);
    rec.values.push_back(err);
  };
  try {
    record();
    for (int k = 1; k <= count; ++k) {
      const double target = k == count ? total : total * k / count;
      integrator.advance(psi, t, target);
      record();
    }
  } catch (const IntegrationError& e) {
    throw TrajectoryError(index, e);
  }
  rec.final_psi = std::move(psi);
  return rec;
}

}  // namespace

CloudRun propagate_cloud(const Cloud& cloud, const SweepProtocol& protocol,
                         const ModelParams& params, const CloudControl& ctrl) {
  params.validate();
  if (cloud.seeds.empty()) throw InvalidParameter("empty cloud");
  if (ctrl.sample_count < 1) throw InvalidParameter("sample_count must be >= 1");
  if (ctrl.chunk < 1) throw InvalidParameter("chunk must be >= 1");
  const std::size_t m = static_cast<std::size_t>(params.sites);
  const std::size_t width = m + 2;
  const std::size_t rows = static_cast<std::size_t>(ctrl.sample_count) + 1;
  const std::size_t n = cloud.seeds.size();

  std::vector<double> sums(rows * width, 0.0);
  std::vector<double> worst(rows, 0.0);
  CloudRun run;
  run.final_ensemble.reserve(n);
  run.drain.reserve(n);

  std::vector<TrajectoryRecord> block;
  for (std::size_t c0 = 0; c0 < n; c0 += ctrl.chunk) {
    const std::size_t c1 = std::min(n, c0 + ctrl.chunk);
    block.assign(c1 - c0, {});
    parallel_for(c1 - c0, ctrl.workers, [&](std::size_t i) {
      block[i] = run_one(cloud.seeds[c0 + i], protocol, params, ctrl, c0 + i);
    });
    for (auto& rec : block) {
      for (std::size_t r = 0; r < rows; ++r) {
        const double* v = rec.values.data() + r * width;
        for (std::size_t j = 0; j < m + 1; ++j) sums[r * width + j] += v[j];
        worst[r] = std::max(worst[r], v[m + 1]);
      }
      run.drain.push_back(orbital_occupations(rec.final_psi).back());
      run.final_ensemble.push_back(std::move(rec.final_psi));
    }
  }

  const double inv = 1.0 / static_cast<double>(n);
  const double total = protocol.duration();
  run.samples.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    CloudSample& s = run.samples[r];
    const int k = static_cast<int>(r);
    s.t = k == ctrl.sample_count ? total : total * k / ctrl.sample_count;
    s.theta = protocol.theta_of(s.t);
    s.occupations.resize(m);
    for (std::size_t j = 0; j < m; ++j) s.occupations[j] = sums[r * width + j] * inv;
    s.energy_per_particle = sums[r * width + m] * inv;
    s.norm_error = worst[r];
    run.max_norm_error = std::max(run.max_norm_error, worst[r]);
  }
  const auto [mean, se] = mean_stderr(run.drain);
  run.p_drain = mean;
  run.stderr_drain = se;
  return run;
}

std::vector<EpsilonRow> efficiency_vs_epsilon(const ModelParams& params,
                                              const SweepProtocol& protocol,
                                              const std::vector<double>& epsilons, int n_traj,
                                              std::uint64_t seed, const CloudControl& ctrl) {
  std::vector<EpsilonRow> rows;
  for (double target : epsilons) {
    EpsilonRow row;
    row.target_epsilon = target;
    row.width = calibrate_width(params, target, n_traj, seed);
    const Cloud cloud = sample_cloud(params, n_traj, row.width, seed);
    row.epsilon = cloud.epsilon;
    const CloudRun run = propagate_cloud(cloud, protocol, params, ctrl);
    row.p_drain = run.p_drain;
    row.stderr_drain = run.stderr_drain;
    if (!rows.empty()) {
      const EpsilonRow& prev = rows.back();
      const double se = std::hypot(prev.stderr_drain, row.stderr_drain);
      row.plateau = std::abs(row.p_drain - prev.p_drain) < 2.0 * se;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_cloud_csv(std::ostream& out, const std::vector<Orbital>& ensemble, int particles) {
  csv::comment(out, "Wigner cloud in amplitude units alpha_j = sqrt(N) psi_j; N = " +
                        std::to_string(particles));
  std::vector<std::string> cols{"traj_index"};
  const std::size_t m = ensemble.empty() ? 0 : ensemble.front().size();
  for (std::size_t j = 1; j <= m; ++j) {
    cols.push_back("re_alpha" + std::to_string(j));
    cols.push_back("im_alpha" + std::to_string(j));
  }
  csv::header(out, cols);
  const double s = std::sqrt(static_cast<double>(particles));
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (const auto& z : ensemble[i]) {
      row.push_back(s * z.real());
      row.push_back(s * z.imag());
    }
    csv::row(out, row);
  }
}

void write_twa_csv(std::ostream& out, const CloudRun& run, int sites) {
  csv::comment(out, "truncated-Wigner average; time in 1/K, energy per particle in K; P_drain " +
                        csv::num(run.p_drain) + " +- " + csv::num(run.stderr_drain) + " over " +
                        std::to_string(run.drain.size()) + " trajectories");
  csv::header(out, csv::trajectory_columns(sites));
  for (const auto& s : run.samples) {
    std::vector<double> row{s.t, s.theta};
    row.insert(row.end(), s.occupations.begin(), s.occupations.end());
    row.push_back(s.energy_per_particle);
    row.push_back(s.norm_error);
    csv::row(out, row);
  }
}

void write_epsilon_csv(std::ostream& out, const std::vector<EpsilonRow>& rows) {
  csv::comment(out, "epsilon scan; epsilon is the std of E/N at theta=0 in K; plateau is 0/1");
  csv::header(out, {"target_epsilon", "epsilon", "width", "p_drain", "stderr", "plateau"});
  for (const auto& r : rows)
    csv::row(out, {r.target_epsilon, r.epsilon, r.width, r.p_drain, r.stderr_drain,
                   r.plateau ? 1.0 : 0.0});
}

}  // namespace bhc
