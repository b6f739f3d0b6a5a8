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

#include "bhc/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bhc/error.hpp"

namespace bhc {

void ModelParams::validate() const {
  if (sites < 2) throw InvalidParameter("site count M must be >= 2");
  if (particles < 1) throw InvalidParameter("particle number N must be >= 1");
  if (!(hopping > 0.0) || !std::isfinite(hopping))
    throw InvalidParameter("hopping scale K must be positive and finite");
  if (!std::isfinite(interaction) || !std::isfinite(detuning))
    throw InvalidParameter("U and V must be finite");
}

ModelParams ModelParams::from_dimensionless(int sites, int particles, double u,
                                            double v, double hopping) {
  if (!(hopping > 0.0)) throw InvalidParameter("hopping scale K must be positive");
  if (particles < 1) throw InvalidParameter("particle number N must be >= 1");
  ModelParams p;
  p.sites = sites;
  p.particles = particles;
  p.hopping = hopping;
  p.interaction = u * hopping / (std::numbers::sqrt2 * particles);
  p.detuning = v * hopping / std::numbers::sqrt2;
  p.validate();
  return p;
}

Dimensionless derive_dimensionless(const ModelParams& params) {
  if (!(params.hopping > 0.0))
    throw InvalidParameter("derive_dimensionless: K must be positive");
  return {std::numbers::sqrt2 * params.particles * params.interaction / params.hopping,
          std::numbers::sqrt2 * params.detuning / params.hopping};
}

int middle_site(int sites) { return sites / 2; }

std::vector<double> hopping_profile(double theta, const ModelParams& params) {
  const double s = params.hopping * std::sin(theta);
  const double c = params.hopping * std::cos(theta);
  std::vector<double> omega(static_cast<std::size_t>(params.sites - 1));
  // 1-based bond j is odd when the 0-based index is even.
  for (std::size_t b = 0; b < omega.size(); ++b) omega[b] = (b % 2 == 0) ? s : c;
  return omega;
}

std::vector<double> site_potentials(const ModelParams& params) {
  std::vector<double> pot(static_cast<std::size_t>(params.sites), 0.0);
  pot[static_cast<std::size_t>(middle_site(params.sites))] = params.detuning;
  return pot;
}

double rate_from_exponent(double exponent) { return kHalfPi * std::pow(10.0, -exponent); }

SweepProtocol SweepProtocol::sweep(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw InvalidParameter("sweep rate must be positive and finite");
  return SweepProtocol(0.0, rate, kHalfPi / rate);
}

SweepProtocol SweepProtocol::from_exponent(double exponent) {
  return sweep(rate_from_exponent(exponent));
}

SweepProtocol SweepProtocol::frozen(double theta, double duration) {
  if (!(duration >= 0.0)) throw InvalidParameter("frozen duration must be >= 0");
  if (theta < 0.0 || theta > kHalfPi) throw InvalidParameter("theta outside [0, pi/2]");
  return SweepProtocol(theta, 0.0, duration);
}

double SweepProtocol::theta_of(double t) const {
  if (rate_ == 0.0) return start_theta_;
  if (t >= duration_) return kHalfPi;
  return std::clamp(start_theta_ + rate_ * t, 0.0, kHalfPi);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  return out;
}

}  // namespace

ModelConfig parse_model_config(const std::string& text) {
  ModelConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto sep = line.find('=');
    if (sep == std::string::npos) sep = line.find(':');
    if (sep == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, sep));
    const std::string value = trim(line.substr(sep + 1));
    if (key == "M") cfg.M = parse_number<int>(key, value);
    else if (key == "N") cfg.N = parse_number<int>(key, value);
    else if (key == "U") cfg.U = parse_number<double>(key, value);
    else if (key == "V") cfg.V = parse_number<double>(key, value);
    else if (key == "K") cfg.K = parse_number<double>(key, value);
    else if (key == "u") cfg.u = parse_number<double>(key, value);
    else if (key == "v") cfg.v = parse_number<double>(key, value);
    else if (key == "rate_exponent") cfg.rate_exponent = parse_number<double>(key, value);
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return cfg;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_config(buf.str());
}

ModelConfig merge_config(const ModelConfig& file, const ModelConfig& overrides) {
  ModelConfig out = file;
  if (overrides.M) out.M = overrides.M;
  if (overrides.N) out.N = overrides.N;
  if (overrides.K) out.K = overrides.K;
  if (overrides.U) {
    out.U = overrides.U;
    if (!overrides.u) out.u.reset();
  }
  if (overrides.V) {
    out.V = overrides.V;
    if (!overrides.v) out.v.reset();
  }
  if (overrides.u) out.u = overrides.u;
  if (overrides.v) out.v = overrides.v;
  if (overrides.rate_exponent) out.rate_exponent = overrides.rate_exponent;
  return out;
}

ModelParams resolve_params(const ModelConfig& config) {
  if (!config.M) throw ConfigError("missing site count M");
  if (!config.N) throw ConfigError("missing particle number N");
  ModelParams p;
  p.sites = *config.M;
  p.particles = *config.N;
  p.hopping = config.K.value_or(1.0);
  if (!(p.hopping > 0.0)) throw ConfigError("K must be positive");
  if (p.particles < 1) throw ConfigError("N must be >= 1");
  if (config.u) p.interaction = *config.u * p.hopping / (std::numbers::sqrt2 * p.particles);
  else p.interaction = config.U.value_or(0.0);
  if (config.v) p.detuning = *config.v * p.hopping / std::numbers::sqrt2;
  else p.detuning = config.V.value_or(0.0);
  try {
    p.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::string describe(const ModelParams& params) {
  const auto d = derive_dimensionless(params);
  std::ostringstream out;
  out << "M=" << params.sites << " N=" << params.particles << " U=" << params.interaction
      << " V=" << params.detuning << " K=" << params.hopping << " (u=" << d.u << ", v=" << d.v
      << ")";
  return out.str();
}

}  // namespace bhc
