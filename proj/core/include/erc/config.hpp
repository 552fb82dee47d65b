#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "erc/objectives.hpp"
#include "erc/text.hpp"

namespace erc {

/// Mechanisms that the ablation matrix switches off.
struct AblationToggles {
  bool use_gen = true;
  bool use_scl = true;
  bool use_speaker = true;
  bool use_dialog_trans = true;

  bool operator==(const AblationToggles&) const = default;
};

/// Every hyperparameter of a run. Serializes to a `key = value` text file;
/// `#` starts a comment.
struct RunConfig {
  // data
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  std::string dataset = "meld";          // meld | emorynlp | dailydialog | iemocap | custom
  std::vector<std::string> labels;       // only for dataset = custom
  std::string excluded_label;            // only for dataset = custom
  std::size_t min_freq = 1;
  std::size_t max_len = kDefaultMaxLen;

  // model
  std::size_t d_model = 64;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t heads = 4;
  std::size_t ff_dim = 128;
  std::string position_encoding = "learned";  // learned | sinusoidal
  std::size_t dialog_layers = 1;
  bool dialog_positions = true;
  std::size_t window = 8;

  // objectives
  double alpha = 0.2;
  double beta = 0.1;
  double tau = 0.07;
  SclVariant scl_variant = SclVariant::kPaperLiteral;
  bool scl_normalize = true;

  // optimization
  double lr = 3e-4;
  double warmup_ratio = 0.1;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;
  std::size_t epochs = 30;
  bool shuffle = true;
  std::vector<std::uint64_t> seeds{42};

  AblationToggles toggles;
  std::filesystem::path out_dir = "runs";

  LabelMap label_map() const;
  LossWeights loss_weights() const { return {alpha, beta, tau}; }

  /// ConfigError on any violated constraint.
  void validate() const;

  std::string to_text() const;
  /// Relative paths are resolved against `base_dir` when it is non-empty.
  static RunConfig from_text(std::string_view text, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
};

}  // namespace erc
