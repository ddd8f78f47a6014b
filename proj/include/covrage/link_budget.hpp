#pragma once

// Line-of-sight link budget and 802.11ad MCS selection.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "covrage/array_model.hpp"
#include "covrage/errors.hpp"
#include "covrage/pattern.hpp"

namespace covrage {

struct LinkParams {
  double eirp_dbm = 30.0;
  double eirp_limit_dbm = 30.0;
  double distance_m = 2.0;
  double frequency_hz = 60e9;
  double path_loss_exponent = 2.0;
  double reference_distance_m = 1.0;
  // Loss at the reference distance. The default is the rounded 60 GHz
  // free-space figure; unset means "compute Friis loss from the frequency".
  std::optional<double> reference_loss_db = 68.0;
  // Peak SNR margin over the highest MCS threshold; MCS selection along a
  // trajectory subtracts the noise penalty from it.
  double headroom_db = 1.5;

  void validate() const {
    if (!(distance_m > 0.0)) throw DomainError("link distance must be positive");
    if (!(reference_distance_m > 0.0)) throw ConfigError("reference distance must be positive");
    if (!(frequency_hz > 0.0)) throw ConfigError("carrier frequency must be positive");
    if (!(path_loss_exponent > 0.0)) throw ConfigError("path loss exponent must be positive");
    if (eirp_dbm > eirp_limit_dbm)
      throw ConfigError("EIRP " + std::to_string(eirp_dbm) + " dBm exceeds the " + std::to_string(eirp_limit_dbm) +
                        " dBm limit");
  }
};

// Free-space (Friis) loss over d metres.
inline double friis_loss_db(double d, double frequency_hz) {
  const double lambda = kSpeedOfLight / frequency_hz;
  return 20.0 * std::log10(4.0 * kPi * d / lambda);
}

// Log-distance path loss.
inline double path_loss(double d, const LinkParams& params) {
  if (!(d > 0.0)) throw DomainError("path loss needs a positive distance, got " + std::to_string(d));
  const double at_reference =
      params.reference_loss_db ? *params.reference_loss_db : friis_loss_db(params.reference_distance_m, params.frequency_hz);
  return at_reference + 10.0 * params.path_loss_exponent * std::log10(d / params.reference_distance_m);
}

inline double received_power(const LinkParams& params, double rx_gain_dbi) {
  return params.eirp_dbm - path_loss(params.distance_m, params) + rx_gain_dbi;
}

// ---------------------------------------------------------------------------
// MCS table

struct McsEntry {
  int index = -1;
  double sensitivity_dbm = std::numeric_limits<double>::infinity();
  double datarate_mbps = 0.0;

  bool is_control() const { return index == 0; }
  bool is_link_lost() const { return index < 0; }
};

// Rate table keyed by minimum receive sensitivity. Index 0 is the control
// PHY entry. Entries are kept in ascending rate order; the table may contain
// entries that are dominated by a faster one with a lower threshold (as the
// 802.11ad SC table does around MCS 5/6), which selection simply never picks.
class McsTable {
 public:
  McsTable() = default;
  explicit McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ConfigError("MCS table is empty");
    std::sort(entries_.begin(), entries_.end(),
              [](const McsEntry& a, const McsEntry& b) { return a.datarate_mbps < b.datarate_mbps; });
    int controls = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const McsEntry& e = entries_[i];
      if (e.index < 0) throw ConfigError("MCS index must be non-negative");
      if (!(e.datarate_mbps > 0.0)) throw ConfigError("MCS " + std::to_string(e.index) + ": datarate must be positive");
      if (!std::isfinite(e.sensitivity_dbm)) throw ConfigError("MCS " + std::to_string(e.index) + ": bad sensitivity");
      if (i > 0 && e.datarate_mbps == entries_[i - 1].datarate_mbps)
        throw ConfigError("MCS table has duplicate datarates");
      for (std::size_t j = 0; j < i; ++j)
        if (entries_[j].index == e.index) throw ConfigError("duplicate MCS index " + std::to_string(e.index));
      if (e.is_control()) ++controls;
    }
    if (controls != 1) throw ConfigError("MCS table needs exactly one control entry (index 0)");
    if (!entries_.front().is_control()) throw ConfigError("control entry must have the lowest datarate");
  }

  const std::vector<McsEntry>& entries() const { return entries_; }
  const McsEntry& control() const { return entries_.front(); }
  const McsEntry& top() const { return entries_.back(); }

  // Lowest threshold among the non-control entries.
  double lowest_data_threshold() const {
    double t = std::numeric_limits<double>::infinity();
    for (const McsEntry& e : entries_)
      if (!e.is_control()) t = std::min(t, e.sensitivity_dbm);
    return t;
  }

 private:
  std::vector<McsEntry> entries_;
};

// IEEE 802.11ad control + single-carrier PHY receive sensitivities.
inline McsTable default_mcs_table() {
  return McsTable({{0, -78.0, 27.5},
                   {1, -68.0, 385.0},
                   {2, -66.0, 770.0},
                   {3, -65.0, 962.5},
                   {4, -64.0, 1155.0},
                   {5, -62.0, 1251.25},
                   {6, -63.0, 1540.0},
                   {7, -62.0, 1925.0},
                   {8, -61.0, 2310.0},
                   {9, -59.0, 2502.5},
                   {10, -55.0, 3080.0},
                   {11, -54.0, 3850.0},
                   {12, -53.0, 4620.0}});
}

// Whitespace separated columns: index, sensitivity (dBm), datarate (Mbps).
// '#' starts a comment.
inline McsTable parse_mcs_table(std::istream& in, const std::string& source = "<stream>") {
  std::vector<McsEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    McsEntry e;
    if (!(fields >> e.index)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected an MCS index");
    }
    if (!(fields >> e.sensitivity_dbm >> e.datarate_mbps))
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'index sensitivity_dbm datarate_mbps'");
    std::string rest;
    if (fields >> rest) throw ConfigError(source + ":" + std::to_string(line_no) + ": unexpected column '" + rest + "'");
    entries.push_back(e);
  }
  return McsTable(std::move(entries));
}

inline McsTable load_mcs_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open MCS table " + path);
  return parse_mcs_table(in, path);
}

// Fastest entry whose sensitivity is met by `level_dbm`. Below every data
// threshold the control entry is returned; below that, a link-lost entry
// (index -1, 0 Mbps).
inline McsEntry select_mcs(double level_dbm, const McsTable& table) {
  if (table.entries().empty()) throw ConfigError("MCS table is empty");
  const auto& entries = table.entries();
  for (auto it = entries.rbegin(); it != entries.rend(); ++it)
    if (level_dbm >= it->sensitivity_dbm) return *it;
  return McsEntry{};
}

// Receive level fed to MCS selection: the peak margin over the top MCS
// threshold, minus the noise penalty at this point.
inline double effective_level_dbm(const LinkParams& link, const McsTable& table, double noise_penalty_db) {
  return table.top().sensitivity_dbm + link.headroom_db - noise_penalty_db;
}

// Noise penalty at `aoa`: how far the gain there falls short of the
// strongest gain anywhere in the hemisphere. The AoA itself is included in
// the maximisation, so the result is never negative.
inline double noise_penalty(const Awv& awv, const UvPoint& aoa, const ArrayConfig& cfg, int grid_resolution = 512) {
  const double at_aoa = directional_gain(awv, cfg, aoa);
  const double peak = std::max(find_gain_peak(awv, cfg, grid_resolution).gain_dbi, at_aoa);
  return peak - at_aoa;
}

inline double noise_penalty(const Awv& awv, const SteeringDirection& aoa, const ArrayConfig& cfg,
                            int grid_resolution = 512) {
  return noise_penalty(awv, aoa.uv(), cfg, grid_resolution);
}

}  // namespace covrage
