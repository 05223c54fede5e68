#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "topoalign/error.hpp"
#include "topoalign/format.hpp"
#include "topoalign/pointcloud.hpp"

namespace topoalign::train {

struct TrainConfig {
  double s = 64.0;             // logit scale
  double m = 0.5;              // additive angular margin
  double alpha = 0.1;          // alignment-loss weight
  double xi = 0.2;             // perturbation probability
  double lambda = 1.0;         // SDS temperature
  std::size_t batch_size = 128;
  double learning_rate = 0.0003;
  double momentum = 0.9;
  std::size_t epochs = 30;
  std::uint64_t rng_seed = 1;
  std::size_t hidden_dim = 64;
  std::size_t latent_dim = 16;

  void validate() const {
    if (!(s > 0.0)) throw InvalidArgument("s must be positive");
    if (!(m >= 0.0 && m < std::numbers::pi / 2)) throw InvalidArgument("m must lie in [0, pi/2)");
    if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be non-negative");
    if (!(xi >= 0.0 && xi <= 1.0)) throw InvalidArgument("xi must lie in [0, 1]");
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
    if (batch_size < 2) throw InvalidArgument("batch_size must be at least 2");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
    if (hidden_dim < 1 || latent_dim < 1) throw InvalidArgument("layer widths must be positive");
  }
};

/// Which parts of the combined objective are active.
struct Components {
  bool rsp = false;  // random structure perturbation of inputs
  bool isa = false;  // structure-alignment loss
  bool w1 = false;   // uncertainty factor (1 + h)^lambda
  bool w2 = false;   // probability factor 1 - g_gt

  friend bool operator==(const Components&, const Components&) = default;
};

/// Parses a mode name: "baseline", "ptsa" (rsp+isa), "topofr" (everything), or a
/// '+'/','-separated list drawn from {rsp, isa, w1, w2}.
inline Components parse_mode(std::string_view mode) {
  if (mode == "baseline") return {};
  if (mode == "ptsa") return {true, true, false, false};
  if (mode == "topofr") return {true, true, true, true};
  Components c;
  std::size_t start = 0;
  while (start <= mode.size()) {
    auto end = mode.find_first_of("+,", start);
    if (end == std::string_view::npos) end = mode.size();
    const auto part = mode.substr(start, end - start);
    if (part == "rsp")
      c.rsp = true;
    else if (part == "isa")
      c.isa = true;
    else if (part == "w1")
      c.w1 = true;
    else if (part == "w2")
      c.w2 = true;
    else
      throw InvalidArgument("unknown mode component '" + std::string(part) + "'");
    start = end + 1;
  }
  return c;
}

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"s",          "m",        "alpha",  "xi",       "lambda",
                                                "batch_size", "learning_rate", "momentum", "epochs", "rng_seed",
                                                "hidden_dim", "latent_dim"};
  return keys;
}

namespace detail {

template <typename T>
T parse_config_value(const std::string& key, const std::string& text, std::size_t line_no) {
  std::istringstream in(text);
  T value{};
  std::string rest;
  if (!(in >> value) || (in >> rest)) throw ParseError("invalid value for '" + key + "'", line_no);
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ParseError("non-finite value for '" + key + "'", line_no);
  }
  return value;
}

}  // namespace detail

/// Reads a flat `key = value` file. Every TrainConfig key is required; unknown keys are rejected.
inline TrainConfig parse_config(std::istream& in) {
  std::map<std::string, std::pair<std::string, std::size_t>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = topoalign::detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    const std::string key(topoalign::detail::trim(t.substr(0, eq)));
    const std::string value(topoalign::detail::trim(t.substr(eq + 1)));
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
      throw ParseError("unknown config key '" + key + "'", line_no);
    if (!entries.emplace(key, std::make_pair(value, line_no)).second)
      throw ParseError("duplicate config key '" + key + "'", line_no);
  }
  for (const auto& key : config_keys())
    if (!entries.contains(key)) throw InvalidArgument("missing config key '" + key + "'");

  auto real = [&](const std::string& k) {
    return detail::parse_config_value<double>(k, entries[k].first, entries[k].second);
  };
  auto count = [&](const std::string& k) {
    const auto v = detail::parse_config_value<long long>(k, entries[k].first, entries[k].second);
    if (v < 0) throw ParseError("'" + k + "' must be non-negative", entries[k].second);
    return static_cast<std::size_t>(v);
  };
  TrainConfig c;
  c.s = real("s");
  c.m = real("m");
  c.alpha = real("alpha");
  c.xi = real("xi");
  c.lambda = real("lambda");
  c.batch_size = count("batch_size");
  c.learning_rate = real("learning_rate");
  c.momentum = real("momentum");
  c.epochs = count("epochs");
  c.rng_seed = detail::parse_config_value<std::uint64_t>("rng_seed", entries["rng_seed"].first,
                                                          entries["rng_seed"].second);
  c.hidden_dim = count("hidden_dim");
  c.latent_dim = count("latent_dim");
  c.validate();
  return c;
}

inline TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_config(in);
}

inline void write_config(std::ostream& out, const TrainConfig& c) {
  out << "s = " << format_real(c.s) << '\n';
  out << "m = " << format_real(c.m) << '\n';
  out << "alpha = " << format_real(c.alpha) << '\n';
  out << "xi = " << format_real(c.xi) << '\n';
  out << "lambda = " << format_real(c.lambda) << '\n';
  out << "batch_size = " << c.batch_size << '\n';
  out << "learning_rate = " << format_real(c.learning_rate) << '\n';
  out << "momentum = " << format_real(c.momentum) << '\n';
  out << "epochs = " << c.epochs << '\n';
  out << "rng_seed = " << c.rng_seed << '\n';
  out << "hidden_dim = " << c.hidden_dim << '\n';
  out << "latent_dim = " << c.latent_dim << '\n';
}

}  // namespace topoalign::train
