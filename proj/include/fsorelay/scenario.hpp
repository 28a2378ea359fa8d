#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fsorelay/amplifier.hpp"
#include "fsorelay/channel.hpp"
#include "fsorelay/error.hpp"
#include "fsorelay/format.hpp"
#include "fsorelay/params.hpp"
#include "fsorelay/receiver.hpp"

namespace fsorelay {

/// One curve of a BER comparison: relay type plus gain strategy.
struct RelayConfiguration {
  RelayType relay = RelayType::fm;
  GainMode gain = GainMode::fixed;

  std::string name() const { return std::string(to_string(relay)) + "-" + to_string(gain); }
  bool operator==(const RelayConfiguration&) const = default;
};

inline RelayConfiguration parse_configuration(const std::string& text) {
  const auto dash = text.find('-');
  require(dash != std::string::npos, ErrorCode::config_invalid, "configuration must look like fm-fixed: " + text);
  const std::string r = text.substr(0, dash), g = text.substr(dash + 1);
  RelayConfiguration c;
  if (r == "sm") c.relay = RelayType::sm;
  else if (r == "fm") c.relay = RelayType::fm;
  else throw Error(ErrorCode::config_invalid, "unknown relay type: " + r);
  if (g == "fixed") c.gain = GainMode::fixed;
  else if (g == "variable") c.gain = GainMode::variable;
  else throw Error(ErrorCode::config_invalid, "unknown gain mode: " + g);
  return c;
}

inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

/// Complete experiment description. Text form: one `key = value` per line,
/// `#` starts a comment, lists are comma separated and numeric lists also
/// accept inclusive ranges `start:step:stop`.
struct Scenario {
  std::string name = "default";

  double d1 = 2500.0;
  double d2 = 2500.0;
  double f_t1 = 0.20;
  double f_t2_fm = 0.2115;
  double f_t2_sm = 0.20;
  double f_r1_fm = 0.40;
  double f_r1_sm = 0.38;
  double f_r2 = 0.40;
  double aperture_rx = 0.150;
  double attenuation_db_per_km = 0.0;

  double cn2 = 0.0;
  double beam_waist = 19e-3;
  ScreenOptions screens{};

  int destination_modes = 1;
  int relay_labels_fm = 2;
  FourModeConvention four_mode = FourModeConvention::lp_labels;

  int grid_points = 1024;
  double grid_spacing = 0.5e-3;
  int facet_points = 128;
  double facet_spacing = 0.5e-6;

  SystemParams params{};
  double mdg_db = 0.0;
  BeatConvention beat = BeatConvention::consistent;
  std::uint64_t mc_bits = 0;

  std::size_t ensemble_size = 1000;
  std::uint64_t master_seed = 1;

  std::vector<RelayConfiguration> configurations = {
      {RelayType::sm, GainMode::fixed},
      {RelayType::sm, GainMode::variable},
      {RelayType::fm, GainMode::fixed},
      {RelayType::fm, GainMode::variable},
  };
  std::vector<double> pt_dbm;  // default: -20 to 30 dBm in 1 dB steps
  std::vector<double> d1_km = {1.0, 2.5, 3.0, 4.0};
  std::vector<double> mdg_list_db = {0.0, 1.0, 2.0, 3.0};
  double ber_target = 1e-4;
  double focal_search_min = 0.17;
  double focal_search_max = 1.2;

  int screen_dump_count = 2;
  int oracle_states = 10;
  int oracle_tones = 1000;
  int oracle_realizations = 400;

  Scenario() {
    for (int i = 0; i <= 50; ++i) pt_dbm.push_back(-20.0 + i);
  }

  double total_length() const noexcept { return d1 + d2; }

  ChannelConfig channel(RelayType relay) const {
    ChannelConfig c;
    c.relay = relay;
    c.geometry.d1 = d1;
    c.geometry.d2 = d2;
    c.geometry.f_t1 = f_t1;
    c.geometry.f_t2 = relay == RelayType::fm ? f_t2_fm : f_t2_sm;
    c.geometry.f_r1 = relay == RelayType::fm ? f_r1_fm : f_r1_sm;
    c.geometry.f_r2 = f_r2;
    c.geometry.aperture_rx = aperture_rx;
    c.geometry.attenuation_db_per_km = attenuation_db_per_km;
    c.relay_labels = relay == RelayType::fm ? relay_labels_fm : 1;
    c.destination_labels = destination_modes;
    c.four_mode = four_mode;
    c.cn2 = cn2;
    c.wavelength = params.wavelength;
    c.beam_waist = beam_waist;
    c.screens = screens;
    c.free_grid = {grid_points, grid_spacing};
    c.facet_grid = {facet_points, facet_spacing};
    return c;
  }

  AmplifierConfig amplifier(GainMode gain, double mdg) const {
    AmplifierConfig a;
    a.nsp = params.nsp;
    a.gain_mode = gain;
    a.mdg_db = mdg;
    a.Pr = params.Pr;
    return a;
  }

  BerOptions ber_options(int threads) const {
    BerOptions o;
    o.convention = beat;
    o.mc_bits = mc_bits;
    o.mc_seed = master_seed;
    o.threads = threads;
    return o;
  }

  void validate() const {
    require(ensemble_size >= 1, ErrorCode::config_invalid, "ensemble_size must be >= 1");
    require(!configurations.empty(), ErrorCode::config_invalid, "at least one configuration required");
    require(ber_target > 0.0 && ber_target < 0.5, ErrorCode::config_invalid, "ber_target must be in (0, 0.5)");
    require(focal_search_min > 0.0 && focal_search_max > focal_search_min, ErrorCode::config_invalid,
            "focal search range must be increasing");
    require(mc_bits == 0 || mc_bits >= 100000, ErrorCode::config_invalid, "mc_bits must be 0 or >= 1e5");
    require(mdg_db >= 0.0, ErrorCode::config_invalid, "mdg_db must be non-negative");
    for (double v : mdg_list_db) require(v >= 0.0, ErrorCode::config_invalid, "MDG values must be non-negative");
    for (double v : d1_km)
      require(v > 0.0 && v * 1000.0 < total_length(), ErrorCode::config_invalid, "relay positions must be inside the link");
    require(screen_dump_count >= 1 && oracle_states >= 1, ErrorCode::config_invalid, "counts must be positive");
    params.validate();
    try {
      channel(RelayType::fm).validate();
      channel(RelayType::sm).validate();
      GridSpec{grid_points, grid_spacing}.validate();
      GridSpec{facet_points, facet_spacing}.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::config_invalid, e.what());
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_number(const std::string& key, const std::string& v) {
  double out = 0.0;
  require(parse_double(v, out), ErrorCode::config_invalid, "bad number for " + key + ": " + v);
  return out;
}

inline std::vector<double> to_numbers(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) {
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(to_number(key, item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    require(c2 != std::string::npos, ErrorCode::config_invalid, "range must be start:step:stop in " + key);
    const double a = to_number(key, item.substr(0, c1));
    const double step = to_number(key, item.substr(c1 + 1, c2 - c1 - 1));
    const double b = to_number(key, item.substr(c2 + 1));
    require(step > 0.0 && b >= a, ErrorCode::config_invalid, "range needs positive step and stop >= start in " + key);
    const auto count = std::size_t(std::floor((b - a) / step + 1e-9)) + 1;
    require(count <= 100000, ErrorCode::config_invalid, "range too long in " + key);
    for (std::size_t i = 0; i < count; ++i) out.push_back(a + double(i) * step);
  }
  return out;
}

inline std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::config_invalid,
          "bad unsigned integer for " + key + ": " + v);
  return out;
}

inline int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::config_invalid,
          "bad integer for " + key + ": " + v);
  return out;
}

struct Field {
  std::function<void(Scenario&, const std::string&, const std::string&)> read;
  std::function<std::string(const Scenario&)> write;
};

template <class T>
Field number_field(T Scenario::*member) {
  return {[member](Scenario& s, const std::string& k, const std::string& v) { s.*member = T(to_number(k, v)); },
          [member](const Scenario& s) { return format_double(double(s.*member)); }};
}

inline Field param_field(double SystemParams::*member) {
  return {[member](Scenario& s, const std::string& k, const std::string& v) { s.params.*member = to_number(k, v); },
          [member](const Scenario& s) { return format_double(s.params.*member); }};
}

inline Field int_field(int Scenario::*member) {
  return {[member](Scenario& s, const std::string& k, const std::string& v) { s.*member = to_int(k, v); },
          [member](const Scenario& s) { return std::to_string(s.*member); }};
}

inline const std::vector<std::pair<std::string, Field>>& scenario_fields() {
  static const std::vector<std::pair<std::string, Field>> fields = [] {
    std::vector<std::pair<std::string, Field>> f;
    f.push_back({"name", {[](Scenario& s, const std::string&, const std::string& v) { s.name = v; },
                          [](const Scenario& s) { return s.name; }}});
    f.push_back({"d1", number_field(&Scenario::d1)});
    f.push_back({"d2", number_field(&Scenario::d2)});
    f.push_back({"f_t1", number_field(&Scenario::f_t1)});
    f.push_back({"f_t2_fm", number_field(&Scenario::f_t2_fm)});
    f.push_back({"f_t2_sm", number_field(&Scenario::f_t2_sm)});
    f.push_back({"f_r1_fm", number_field(&Scenario::f_r1_fm)});
    f.push_back({"f_r1_sm", number_field(&Scenario::f_r1_sm)});
    f.push_back({"f_r2", number_field(&Scenario::f_r2)});
    f.push_back({"aperture_rx", number_field(&Scenario::aperture_rx)});
    f.push_back({"attenuation_db_per_km", number_field(&Scenario::attenuation_db_per_km)});
    f.push_back({"cn2", number_field(&Scenario::cn2)});
    f.push_back({"beam_waist", number_field(&Scenario::beam_waist)});
    f.push_back({"screen_placement",
                 {[](Scenario& s, const std::string&, const std::string& v) {
                    if (v == "receiver") s.screens.placement = ScreenPlacement::receiver;
                    else if (v == "transmitter") s.screens.placement = ScreenPlacement::transmitter;
                    else throw Error(ErrorCode::config_invalid, "screen_placement must be receiver or transmitter");
                  },
                  [](const Scenario& s) {
                    return std::string(s.screens.placement == ScreenPlacement::receiver ? "receiver" : "transmitter");
                  }}});
    f.push_back({"split_steps", {[](Scenario& s, const std::string& k, const std::string& v) {
                                   s.screens.split_steps = to_int(k, v);
                                 },
                                 [](const Scenario& s) { return std::to_string(s.screens.split_steps); }}});
    f.push_back({"subharmonics", {[](Scenario& s, const std::string& k, const std::string& v) {
                                    s.screens.subharmonics = to_int(k, v);
                                  },
                                  [](const Scenario& s) { return std::to_string(s.screens.subharmonics); }}});
    f.push_back({"destination_modes", int_field(&Scenario::destination_modes)});
    f.push_back({"relay_labels_fm", int_field(&Scenario::relay_labels_fm)});
    f.push_back({"four_mode_convention",
                 {[](Scenario& s, const std::string&, const std::string& v) {
                    if (v == "lp-labels") s.four_mode = FourModeConvention::lp_labels;
                    else if (v == "spatial-fields") s.four_mode = FourModeConvention::spatial_fields;
                    else throw Error(ErrorCode::config_invalid, "four_mode_convention must be lp-labels or spatial-fields");
                  },
                  [](const Scenario& s) {
                    return std::string(s.four_mode == FourModeConvention::lp_labels ? "lp-labels" : "spatial-fields");
                  }}});
    f.push_back({"grid_points", int_field(&Scenario::grid_points)});
    f.push_back({"grid_spacing", number_field(&Scenario::grid_spacing)});
    f.push_back({"facet_points", int_field(&Scenario::facet_points)});
    f.push_back({"facet_spacing", number_field(&Scenario::facet_spacing)});
    f.push_back({"wavelength", param_field(&SystemParams::wavelength)});
    f.push_back({"Be", param_field(&SystemParams::Be)});
    f.push_back({"Bo", param_field(&SystemParams::Bo)});
    f.push_back({"Rb", param_field(&SystemParams::Rb)});
    f.push_back({"nsp", param_field(&SystemParams::nsp)});
    f.push_back({"T", param_field(&SystemParams::T)});
    f.push_back({"rho", param_field(&SystemParams::rho)});
    f.push_back({"RL", param_field(&SystemParams::RL)});
    f.push_back({"Pb", param_field(&SystemParams::Pb)});
    f.push_back({"Pr", param_field(&SystemParams::Pr)});
    f.push_back({"mdg_db", number_field(&Scenario::mdg_db)});
    f.push_back({"beat_convention",
                 {[](Scenario& s, const std::string&, const std::string& v) {
                    if (v == "consistent") s.beat = BeatConvention::consistent;
                    else if (v == "as-printed") s.beat = BeatConvention::as_printed;
                    else throw Error(ErrorCode::config_invalid, "beat_convention must be consistent or as-printed");
                  },
                  [](const Scenario& s) { return std::string(to_string(s.beat)); }}});
    f.push_back({"mc_bits", {[](Scenario& s, const std::string& k, const std::string& v) { s.mc_bits = to_u64(k, v); },
                             [](const Scenario& s) { return std::to_string(s.mc_bits); }}});
    f.push_back({"ensemble_size",
                 {[](Scenario& s, const std::string& k, const std::string& v) { s.ensemble_size = to_u64(k, v); },
                  [](const Scenario& s) { return std::to_string(s.ensemble_size); }}});
    f.push_back({"master_seed",
                 {[](Scenario& s, const std::string& k, const std::string& v) { s.master_seed = to_u64(k, v); },
                  [](const Scenario& s) { return std::to_string(s.master_seed); }}});
    f.push_back({"configurations", {[](Scenario& s, const std::string&, const std::string& v) {
                                      s.configurations.clear();
                                      for (const auto& item : split_list(v))
                                        s.configurations.push_back(parse_configuration(item));
                                    },
                                    [](const Scenario& s) {
                                      std::string out;
                                      for (std::size_t i = 0; i < s.configurations.size(); ++i)
                                        out += (i ? ", " : "") + s.configurations[i].name();
                                      return out;
                                    }}});
    f.push_back({"pt_dbm", {[](Scenario& s, const std::string& k, const std::string& v) { s.pt_dbm = to_numbers(k, v); },
                            [](const Scenario& s) { return join_numbers(s.pt_dbm); }}});
    f.push_back({"d1_km", {[](Scenario& s, const std::string& k, const std::string& v) { s.d1_km = to_numbers(k, v); },
                           [](const Scenario& s) { return join_numbers(s.d1_km); }}});
    f.push_back({"mdg_list_db",
                 {[](Scenario& s, const std::string& k, const std::string& v) { s.mdg_list_db = to_numbers(k, v); },
                  [](const Scenario& s) { return join_numbers(s.mdg_list_db); }}});
    f.push_back({"ber_target", number_field(&Scenario::ber_target)});
    f.push_back({"focal_search_min", number_field(&Scenario::focal_search_min)});
    f.push_back({"focal_search_max", number_field(&Scenario::focal_search_max)});
    f.push_back({"screen_dump_count", int_field(&Scenario::screen_dump_count)});
    f.push_back({"oracle_states", int_field(&Scenario::oracle_states)});
    f.push_back({"oracle_tones", int_field(&Scenario::oracle_tones)});
    f.push_back({"oracle_realizations", int_field(&Scenario::oracle_realizations)});
    return f;
  }();
  return fields;
}

}  // namespace detail

/// Parses scenario text on top of the defaults. Unknown keys, malformed
/// lines and bad values raise config_invalid.
inline Scenario parse_scenario(const std::string& text) {
  Scenario s;
  std::map<std::string, const detail::Field*> index;
  for (const auto& [k, f] : detail::scenario_fields()) index[k] = &f;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::config_invalid, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto it = index.find(key);
    require(it != index.end(), ErrorCode::config_invalid, "line " + std::to_string(lineno) + ": unknown key " + key);
    it->second->read(s, key, value);
  }
  s.validate();
  return s;
}

/// Canonical text: every key in a fixed order, numbers in shortest
/// round-trip form, so parse(serialize(s)) serializes to the same bytes.
inline std::string serialize_scenario(const Scenario& s) {
  std::string out;
  for (const auto& [k, f] : detail::scenario_fields()) out += k + " = " + f.write(s) + "\n";
  return out;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), ErrorCode::io_failure, "cannot read scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string scenario_hash(const Scenario& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_scenario(s))));
  return buf;
}

}  // namespace fsorelay
