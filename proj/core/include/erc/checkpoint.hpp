#pragma once

#include <cstddef>
#include <filesystem>

#include "erc/config.hpp"
#include "erc/model.hpp"
#include "erc/text.hpp"

namespace erc {

/// Binary checkpoint layout (little-endian):
///   "ERCCKPT\0" | u32 version
///   str config_text | u64 n, n × str vocab | u64 n, n × str labels | str excluded
///   i64 epoch | f64 dev_score
///   u64 n, n × { str name | u64 rank | rank × u64 dim | f64 data[] }
/// where str is u64 length + bytes.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  RunConfig config;
  Vocab vocab;
  LabelMap labels;
  ErcModel model;
  std::int64_t epoch = -1;
  double dev_score = 0.0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws DataError for unreadable or truncated files and
/// CompatibilityError when stored tensors do not fit the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace erc
