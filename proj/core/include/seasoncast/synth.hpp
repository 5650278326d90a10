#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "seasoncast/dataset.hpp"

namespace seasoncast {

/// Desk-scale synthetic retail data with a planted climate effect.
///
/// Each store has a seasonal temperature cycle plus a persistent AR(1)
/// anomaly that seasonality alone cannot predict. Sales of every product
/// respond to the store's average temperature with slope `beta`. Ensemble
/// forecasts are issued every `issue_interval` weeks, centered on the true
/// future climate up to a per-vintage error, with member spread growing
/// linearly in lead.
struct SynthConfig {
  std::size_t n_stores = 20;
  std::size_t n_products = 10;
  std::size_t n_weeks = 150;
  std::uint64_t seed = 1;
  std::string start_date = "2018-01-01";

  // Climate, drawn per store from [lo, hi].
  double climate_mean_lo = 8.0;  // degC
  double climate_mean_hi = 22.0;
  double amplitude_lo = 5.0;  // degC
  double amplitude_hi = 10.0;
  double anomaly_std = 3.0;  // stationary std of the AR(1) anomaly, degC
  double anomaly_persistence = 0.9;
  double diurnal_range = 8.0;  // tmax - tmin, degC
  double precip_mean = 3.0;    // mm/day
  double precip_std = 1.5;

  // Ensembles.
  std::size_t n_members = 50;
  std::size_t n_leads = 16;
  std::size_t issue_interval = 4;
  double member_spread = 1.0;      // sigma_0 of sigma_lead = sigma_0 * (1 + 0.1 * lead)
  double mean_error_std = 0.3;     // per-vintage error of the ensemble mean, scaled like the spread
  double spread_variability = 0.5; // per-vintage spread multiplier drawn from 1 +- this

  // Demand.
  double base_lo = 60.0;
  double base_hi = 140.0;
  double seasonal_amplitude = 4.0;  // product-specific cycle independent of climate
  double beta = 0.75;               // units per degC of average-temperature deviation
  double noise_std = 3.0;

  void validate() const;
};

struct StoreClimate {
  std::string location;
  double mean = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;  // weeks
};

struct ProductDemand {
  std::string product;
  double base = 0.0;
  double phase = 0.0;  // weeks
};

struct SynthTruth {
  double beta = 0.0;
  std::vector<StoreClimate> stores;
  std::vector<ProductDemand> products;
};

struct SynthArtifacts {
  Dataset dataset;
  /// Realized weekly climate per location and attribute.
  std::map<std::string, std::map<ClimateAttribute, WeeklySeries>> climate;
  SynthTruth truth;
  SynthConfig config;
};

/// Fully determined by config.seed.
SynthArtifacts generate(const SynthConfig& config);

/// Writes series.csv, ensembles.csv, climate_truth.csv and truth.json;
/// returns the paths written.
std::vector<std::filesystem::path> write_dataset(const SynthArtifacts& artifacts,
                                                 const std::filesystem::path& out_dir);

std::string store_name(std::size_t index);
std::string product_name(std::size_t index);

}  // namespace seasoncast
