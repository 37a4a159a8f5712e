#pragma once

// Sweep configuration files: INI sections [sweep], [estimators], and one of
// [synthetic] or [data]. The schema is documented in docs/formats.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "coldstart/sweep.hpp"

namespace coldstart {

struct DataSource {
  std::filesystem::path ratings;
  RatingFormat format = RatingFormat::csv;
  RatingScale scale;
  std::size_t heldout_items = 0;
  std::uint64_t split_seed = 1;
  std::optional<std::filesystem::path> model;  ///< trained on the split when absent
  TrainConfig training;
};

struct SweepFile {
  SweepConfig sweep;
  std::optional<SyntheticSweepConfig> synthetic;
  std::optional<DataSource> data;
};

/// Throws ParseError (with the line, when known) on malformed input,
/// unknown sections or keys, or invalid values.
SweepFile parse_sweep_config(std::istream& in);
SweepFile load_sweep_config(const std::filesystem::path& path);

}  // namespace coldstart
