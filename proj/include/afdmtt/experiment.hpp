// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <map>
#include <sstream>

#include "afdmtt/harness.hpp"

namespace afdmtt {

/// One experiment = one system configuration plus one sweep description.
struct Experiment {
  SystemConfig cfg;
  SweepSpec sweep;
  std::string out_path;  // empty means stdout
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for " + key + ": " + v);
  }
  if (pos != v.size())
    throw std::invalid_argument("config: trailing junk in value for " + key + ": " + v);
  return x;
}

inline Index to_index(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  const auto i = static_cast<Index>(std::llround(x));
  if (static_cast<double>(i) != x)
    throw std::invalid_argument("config: " + key + " must be an integer, got " + v);
  return i;
}

}  // namespace detail

/// SNR sweep spec: a single value, a comma list, or an inclusive a:b:step
/// range.
inline std::vector<double> parse_snr_spec(const std::string& spec) {
  const std::string s = detail::trim(spec);
  if (s.empty()) throw std::invalid_argument("snr spec is empty");
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::stringstream ss(s);
    std::string a, b, st;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, st))
      throw std::invalid_argument("snr range must be start:stop:step, got " + s);
    const double lo = detail::to_double("snr", detail::trim(a));
    const double hi = detail::to_double("snr", detail::trim(b));
    const double step = detail::to_double("snr", detail::trim(st));
    if (step <= 0.0 || hi < lo)
      throw std::invalid_argument("snr range must ascend with positive step: " + s);
    for (double x = lo; x <= hi + 1e-9; x += step) out.push_back(x);
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = detail::trim(tok);
    if (t.empty()) throw std::invalid_argument("snr list has an empty entry: " + s);
    out.push_back(detail::to_double("snr", t));
  }
  return out;
}

/// Parse a flat key=value experiment description ('#' starts a comment).
/// Unset keys keep the large-array defaults; geometry keys derived from the
/// transform size (c1, m_pilot, m_region, m_guard) are recomputed when their
/// parents change unless given explicitly. Unknown keys are an error.
inline Experiment parse_experiment(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is not key=value: " + t);
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has an empty key or value");
    if (!kv.emplace(key, val).second)
      throw std::invalid_argument("config: duplicate key " + key);
  }

  Experiment ex;
  const auto has = [&](const char* k) { return kv.count(k) != 0; };
  const auto take = [&](const char* k) {
    const auto it = kv.find(k);
    const std::string v = it->second;
    kv.erase(it);
    return v;
  };

  bool geometry_touched = false;
  const auto idx_field = [&](const char* k, Index& dst, bool geometry) {
    if (!has(k)) return;
    dst = detail::to_index(k, take(k));
    geometry_touched = geometry_touched || geometry;
  };
  const auto dbl_field = [&](const char* k, double& dst, bool geometry) {
    if (!has(k)) return;
    dst = detail::to_double(k, take(k));
    geometry_touched = geometry_touched || geometry;
  };

  SystemConfig& c = ex.cfg;
  idx_field("m", c.M, true);
  idx_field("n", c.N, false);
  idx_field("n_frame", c.N_frame, false);
  idx_field("m_cpp", c.M_CPP, true);
  dbl_field("delta_f", c.delta_f, false);
  dbl_field("f_c", c.f_c, false);
  dbl_field("nu_max", c.nu_max, true);
  idx_field("n_bs", c.N_BS, false);
  dbl_field("spacing", c.antenna_spacing, false);
  idx_field("p", c.P, false);
  dbl_field("pilot_boost", c.pilot_boost, false);

  if (geometry_touched) {
    c.c1 = 1.0 / (2.0 * static_cast<double>(c.M));
    c.m_pilot = c.M / 2;
    c.M_region = c.default_region();
    c.M_guard = c.M_region - 1;
  }
  dbl_field("c1", c.c1, false);
  dbl_field("c2", c.c2, false);
  idx_field("m_pilot", c.m_pilot, false);
  idx_field("m_guard", c.M_guard, false);
  idx_field("m_region", c.M_region, false);

  SweepSpec& s = ex.sweep;
  if (has("scenario")) s.scenario = scenario_from_name(take("scenario"));
  if (has("snr")) s.snr_db = parse_snr_spec(take("snr"));
  if (has("trials")) {
    const Index t = detail::to_index("trials", take("trials"));
    if (t < 1) throw std::invalid_argument("config: trials must be at least 1");
    s.trials = static_cast<int>(t);
  }
  if (has("seed"))
    s.master_seed = static_cast<std::uint64_t>(detail::to_index("seed", take("seed")));
  if (has("qam")) s.qam_order = detail::to_index("qam", take("qam"));
  if (has("cp_max_iter"))
    s.cp_max_iter = static_cast<int>(detail::to_index("cp_max_iter", take("cp_max_iter")));
  if (has("cp_tol")) s.cp_tol = detail::to_double("cp_tol", take("cp_tol"));
  if (has("out")) ex.out_path = take("out");

  if (!kv.empty())
    throw std::invalid_argument("config: unknown key " + kv.begin()->first);
  ex.cfg.validate();
  return ex;
}

}  // namespace afdmtt
