#include "seasoncast/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "seasoncast/config_io.hpp"
#include "seasoncast/error.hpp"
#include "seasoncast/random.hpp"

namespace seasoncast {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kWeeksPerYear = 52.0;

void require(bool ok, const char* message) {
  if (!ok) {
    throw Error(ErrorCode::InvalidConfig, message);
  }
}

double spread_at(const SynthConfig& c, std::size_t lead) {
  return c.member_spread * (1.0 + 0.1 * static_cast<double>(lead));
}

}  // namespace

void SynthConfig::validate() const {
  require(n_weeks >= 1, "n_weeks must be >= 1");
  require(n_members >= 2, "n_members must be >= 2");
  require(n_leads >= 1, "n_leads must be >= 1");
  require(issue_interval >= 1, "issue_interval must be >= 1");
  require(climate_mean_lo <= climate_mean_hi, "climate mean range is empty");
  require(amplitude_lo >= 0.0 && amplitude_lo <= amplitude_hi, "amplitude range is invalid");
  require(anomaly_std >= 0.0, "anomaly_std must be >= 0");
  require(anomaly_persistence >= 0.0 && anomaly_persistence < 1.0, "anomaly_persistence must lie in [0, 1)");
  require(diurnal_range >= 0.0, "diurnal_range must be >= 0");
  require(precip_std >= 0.0, "precip_std must be >= 0");
  require(member_spread > 0.0, "member_spread must be positive");
  require(mean_error_std >= 0.0, "mean_error_std must be >= 0");
  require(spread_variability >= 0.0 && spread_variability < 1.0, "spread_variability must lie in [0, 1)");
  require(base_lo <= base_hi, "base range is empty");
  require(seasonal_amplitude >= 0.0, "seasonal_amplitude must be >= 0");
  require(noise_std >= 0.0, "noise_std must be >= 0");
  parse_date(start_date);
}

std::string store_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%03zu", index + 1);
  return buf;
}

std::string product_name(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "P%03zu", index + 1);
  return buf;
}

SynthArtifacts generate(const SynthConfig& config) {
  config.validate();
  SynthArtifacts out;
  out.config = config;
  out.truth.beta = config.beta;
  Rng rng(config.seed);

  const WeekIndex start = week_of_day(parse_date(config.start_date));
  const auto interval = static_cast<WeekIndex>(config.issue_interval);
  const auto n_weeks = static_cast<WeekIndex>(config.n_weeks);
  // Vintages run from one interval before the first week to the last week,
  // so the climate must be realized out to the last vintage's final lead.
  const WeekIndex climate_start = start - interval;
  const WeekIndex last_issue = start + n_weeks - 1;
  const WeekIndex climate_end = last_issue + static_cast<WeekIndex>(config.n_leads) + 1;
  const auto climate_len = static_cast<std::size_t>(climate_end - climate_start);

  for (std::size_t s = 0; s < config.n_stores; ++s) {
    StoreClimate sc;
    sc.location = store_name(s);
    sc.mean = uniform(rng, config.climate_mean_lo, config.climate_mean_hi);
    sc.amplitude = uniform(rng, config.amplitude_lo, config.amplitude_hi);
    sc.phase = uniform(rng, 0.0, kWeeksPerYear);
    out.truth.stores.push_back(sc);
  }
  for (std::size_t p = 0; p < config.n_products; ++p) {
    ProductDemand pd;
    pd.product = product_name(p);
    pd.base = uniform(rng, config.base_lo, config.base_hi);
    pd.phase = uniform(rng, 0.0, kWeeksPerYear);
    out.truth.products.push_back(pd);
  }

  const double innovation = config.anomaly_std * std::sqrt(1.0 - config.anomaly_persistence * config.anomaly_persistence);
  for (const auto& sc : out.truth.stores) {
    auto& by_attr = out.climate[sc.location];
    WeeklySeries tavg{climate_start, std::vector<double>(climate_len)};
    WeeklySeries tmin{climate_start, std::vector<double>(climate_len)};
    WeeklySeries tmax{climate_start, std::vector<double>(climate_len)};
    WeeklySeries precip{climate_start, std::vector<double>(climate_len)};
    double anomaly = normal(rng, 0.0, config.anomaly_std);
    for (std::size_t i = 0; i < climate_len; ++i) {
      const double week = static_cast<double>(climate_start + static_cast<WeekIndex>(i));
      if (i > 0) {
        anomaly = config.anomaly_persistence * anomaly + normal(rng, 0.0, innovation);
      }
      const double avg = sc.mean + sc.amplitude * std::sin(kTwoPi * (week - sc.phase) / kWeeksPerYear) + anomaly;
      tavg.values[i] = avg;
      tmin.values[i] = avg - 0.5 * config.diurnal_range + normal(rng, 0.0, 0.5);
      tmax.values[i] = avg + 0.5 * config.diurnal_range + normal(rng, 0.0, 0.5);
      precip.values[i] = std::max(0.0, normal(rng, config.precip_mean, config.precip_std));
    }
    by_attr[ClimateAttribute::TAvg] = std::move(tavg);
    by_attr[ClimateAttribute::TMin] = std::move(tmin);
    by_attr[ClimateAttribute::TMax] = std::move(tmax);
    by_attr[ClimateAttribute::Precip] = std::move(precip);
  }

  // Ensembles: member = truth + vintage error + spread * standardized draw.
  // Standardizing across members pins each lead's member std to exactly
  // sigma_lead times the vintage multiplier, so spread grows with lead.
  constexpr ClimateAttribute kAttributes[] = {ClimateAttribute::TMin, ClimateAttribute::TAvg,
                                              ClimateAttribute::TMax, ClimateAttribute::Precip};
  for (const auto& sc : out.truth.stores) {
    for (auto attribute : kAttributes) {
      const auto& truth = out.climate[sc.location][attribute];
      for (WeekIndex issue = start - interval; issue <= last_issue; issue += interval) {
        EnsembleForecast f;
        f.location = sc.location;
        f.attribute = attribute;
        f.issue_week = issue;
        f.n_members = config.n_members;
        f.n_leads = config.n_leads;
        f.members.resize(f.n_members * f.n_leads);
        const double multiplier = uniform(rng, 1.0 - config.spread_variability, 1.0 + config.spread_variability);
        std::vector<double> z(config.n_members);
        for (std::size_t lead = 1; lead <= config.n_leads; ++lead) {
          const double sigma = spread_at(config, lead) * multiplier;
          const double center = truth.at(issue + static_cast<WeekIndex>(lead)) +
                                normal(rng, 0.0, config.mean_error_std * sigma / config.member_spread);
          double mean = 0.0;
          for (auto& v : z) {
            v = standard_normal(rng);
            mean += v;
          }
          mean /= static_cast<double>(z.size());
          double ss = 0.0;
          for (double v : z) {
            ss += (v - mean) * (v - mean);
          }
          const double sd = std::sqrt(ss / static_cast<double>(z.size()));
          for (std::size_t m = 0; m < config.n_members; ++m) {
            // Millidegree resolution keeps the ensemble file compact.
            const double v = std::round((center + sigma * (z[m] - mean) / sd) * 1000.0) / 1000.0;
            f.members[m * f.n_leads + (lead - 1)] = v;
          }
        }
        out.dataset.ensembles.push_back(std::move(f));
      }
    }
  }

  for (const auto& sc : out.truth.stores) {
    const auto& tavg = out.climate[sc.location][ClimateAttribute::TAvg];
    for (const auto& pd : out.truth.products) {
      WeeklySeries sales{start, std::vector<double>(config.n_weeks)};
      for (std::size_t i = 0; i < config.n_weeks; ++i) {
        const WeekIndex w = start + static_cast<WeekIndex>(i);
        const double seasonal =
            config.seasonal_amplitude * std::sin(kTwoPi * (static_cast<double>(w) - pd.phase) / kWeeksPerYear);
        const double climate = config.beta * (tavg.at(w) - sc.mean);
        const double value = pd.base + seasonal + climate + normal(rng, 0.0, config.noise_std);
        sales.values[i] = std::max(0.0, value);
      }
      out.dataset.series[sc.location + "/" + pd.product]["sales"] = std::move(sales);
    }
  }
  return out;
}

std::vector<std::filesystem::path> write_dataset(const SynthArtifacts& artifacts,
                                                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  }
  std::vector<std::filesystem::path> written;
  const auto series = out_dir / kSeriesFile;
  write_series_csv(series, artifacts.dataset);
  written.push_back(series);
  const auto ensembles = out_dir / kEnsembleFile;
  write_ensembles_csv(ensembles, artifacts.dataset);
  written.push_back(ensembles);

  const auto climate = out_dir / "climate_truth.csv";
  {
    std::ofstream out(climate, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot write " + climate.string());
    }
    std::string buffer = "location,date,attribute,value\n";
    for (const auto& [location, by_attr] : artifacts.climate) {
      for (const auto& [attribute, s] : by_attr) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
          buffer += location + "," + format_date(week_start(s.start + static_cast<WeekIndex>(i))) + "," +
                    std::string(to_string(attribute)) + "," + format_double(s.values[i]) + "\n";
        }
      }
    }
    out << buffer;
  }
  written.push_back(climate);

  const auto truth = out_dir / "truth.json";
  {
    nlohmann::json j;
    j["beta"] = artifacts.truth.beta;
    j["config"] = nlohmann::json::parse(to_json(artifacts.config));
    for (const auto& s : artifacts.truth.stores) {
      j["stores"].push_back({{"location", s.location}, {"mean", s.mean}, {"amplitude", s.amplitude}, {"phase", s.phase}});
    }
    j["products"] = nlohmann::json::array();
    for (const auto& p : artifacts.truth.products) {
      j["products"].push_back({{"product", p.product}, {"base", p.base}, {"phase", p.phase}});
    }
    std::ofstream out(truth, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot write " + truth.string());
    }
    out << j.dump(2) << "\n";
  }
  written.push_back(truth);
  return written;
}

}  // namespace seasoncast
