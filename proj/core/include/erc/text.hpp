#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace erc {

struct Utterance {
  std::string speaker;
  std::string text;
  int label = 0;
  std::string dialogue_id;
  std::size_t index_in_dialogue = 0;
};

struct Dialogue {
  std::string dialogue_id;
  std::vector<Utterance> utterances;
};

using Corpus = std::vector<Dialogue>;

/// Emotion names of one dataset with contiguous ids, plus the label ignored
/// by the micro-F1 convention (DailyDialog's "neutral").
class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(std::vector<std::string> names, std::optional<std::string> excluded = {});

  /// Presets for "meld", "emorynlp", "dailydialog" and "iemocap".
  static LabelMap preset(std::string_view dataset);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int id) const;
  std::optional<int> find(std::string_view name) const;
  /// Throws LabelError for unknown names.
  int id(std::string_view name) const;

  const std::optional<std::string>& excluded_name() const { return excluded_; }
  std::optional<int> excluded_id() const;

  bool operator==(const LabelMap& other) const = default;

 private:
  std::vector<std::string> names_;
  std::optional<std::string> excluded_;
};

/// Token vocabulary. Ids 0..3 are reserved for <s>, </s>, <pad>, <unk>.
class Vocab {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kPad = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumReserved = 4;

  Vocab();
  /// Rebuilds from an id-ordered token list that starts with the reserved tokens.
  explicit Vocab(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Appends `token` if absent and returns its id.
  int add(const std::string& token);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// Separator spliced between the speaker name and the utterance text.
inline constexpr std::string_view kSpeakerSeparator = ":";
inline constexpr std::size_t kDefaultMaxLen = 64;

/// Lowercases and splits on whitespace; every ASCII punctuation character
/// becomes a token of its own.
std::vector<std::string> tokenize(std::string_view text);

/// Token strings of the framed utterance without <s> and </s>:
/// [speaker tokens, ":", text tokens] or just the text tokens.
std::vector<std::string> splice_tokens(const Utterance& u, bool use_speaker);

/// Parses a JSONL corpus, one dialogue per line. Blank lines are skipped.
Corpus load_corpus(const std::filesystem::path& path, const LabelMap& labels);
Corpus parse_corpus(std::string_view jsonl, const LabelMap& labels);

/// Writes the JSONL form read by `load_corpus`.
std::string corpus_to_jsonl(const Corpus& corpus, const LabelMap& labels);

/// Counts spliced tokens (speaker names included) and keeps those seen at
/// least `min_freq` times, ordered by descending frequency then lexically.
Vocab build_vocab(const Corpus& corpus, std::size_t min_freq = 1);

/// Ids for <s> [speaker : ] text </s>, truncated to `max_len` with the final
/// </s> kept.
std::vector<int> encode_utterance(const Utterance& u, const Vocab& vocab, bool use_speaker,
                                  std::size_t max_len = kDefaultMaxLen);

/// Token strings of `ids` with the frame and padding removed.
std::vector<std::string> decode_tokens(std::span<const int> ids, const Vocab& vocab);

/// Consecutive non-overlapping chunks of at most `window` utterances.
std::vector<std::span<const Utterance>> make_windows(const Dialogue& d, std::size_t window);

struct CorpusStats {
  std::size_t num_dialogues = 0;
  std::size_t num_utterances = 0;
  std::size_t num_classes = 0;
  std::vector<std::size_t> class_counts;
};

CorpusStats corpus_stats(const Corpus& corpus, const LabelMap& labels);

}  // namespace erc
