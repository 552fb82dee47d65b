#include "erc/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "erc/errors.hpp"

namespace erc {

using nlohmann::json;

LabelMap::LabelMap(std::vector<std::string> names, std::optional<std::string> excluded)
    : names_(std::move(names)), excluded_(std::move(excluded)) {
  if (names_.empty()) throw ConfigError("label map needs at least one label");
  for (std::size_t i = 0; i < names_.size(); ++i)
    for (std::size_t j = i + 1; j < names_.size(); ++j)
      if (names_[i] == names_[j]) throw ConfigError("duplicate label name '" + names_[i] + "'");
  if (excluded_ && !find(*excluded_)) {
    throw ConfigError("excluded label '" + *excluded_ + "' is not in the label set");
  }
}

LabelMap LabelMap::preset(std::string_view dataset) {
  if (dataset == "meld") {
    return LabelMap({"neutral", "surprise", "fear", "sadness", "joy", "disgust", "anger"});
  }
  if (dataset == "emorynlp") {
    return LabelMap({"joyful", "neutral", "powerful", "mad", "sad", "scared", "peaceful"});
  }
  if (dataset == "dailydialog") {
    return LabelMap({"neutral", "happiness", "surprise", "anger", "disgust", "fear", "sadness"},
                    "neutral");
  }
  if (dataset == "iemocap") {
    return LabelMap({"excited", "neutral", "frustrated", "sad", "happy", "angry"});
  }
  throw ConfigError("no label preset for dataset '" + std::string(dataset) + "'");
}

const std::string& LabelMap::name(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
    throw IndexError("label id " + std::to_string(id) + " outside " + std::to_string(names_.size()) +
                     " classes");
  }
  return names_[static_cast<std::size_t>(id)];
}

std::optional<int> LabelMap::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

int LabelMap::id(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw LabelError("unknown label '" + std::string(name) + "'");
}

std::optional<int> LabelMap::excluded_id() const {
  if (!excluded_) return std::nullopt;
  return find(*excluded_);
}

Vocab::Vocab() {
  for (const char* t : {"<s>", "</s>", "<pad>", "<unk>"}) add(t);
}

Vocab::Vocab(std::vector<std::string> tokens) {
  const Vocab reserved;
  if (tokens.size() < kNumReserved ||
      !std::equal(reserved.tokens_.begin(), reserved.tokens_.end(), tokens.begin())) {
    throw DataError("vocabulary must start with the reserved tokens <s> </s> <pad> <unk>");
  }
  for (auto& t : tokens) {
    if (contains(t)) throw DataError("duplicate vocabulary token '" + t + "'");
    add(t);
  }
}

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const { return ids_.count(std::string(token)) != 0; }

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocab::add(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, static_cast<int>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

std::vector<std::string> splice_tokens(const Utterance& u, bool use_speaker) {
  std::vector<std::string> out;
  if (use_speaker) {
    out = tokenize(u.speaker);
    if (!out.empty()) out.emplace_back(kSpeakerSeparator);
  }
  auto text = tokenize(u.text);
  out.insert(out.end(), std::make_move_iterator(text.begin()), std::make_move_iterator(text.end()));
  return out;
}

Corpus parse_corpus(std::string_view jsonl, const LabelMap& labels) {
  Corpus corpus;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    const auto nl = jsonl.find('\n', pos);
    const auto line = jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? jsonl.size() + 1 : nl + 1;
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed JSON (" + e.what() + ")");
    }
    try {
      Dialogue d;
      d.dialogue_id = obj.at("dialogue_id").get<std::string>();
      const auto& utts = obj.at("utterances");
      if (!utts.is_array() || utts.empty()) {
        throw DataError(where + ": dialogue '" + d.dialogue_id + "' has no utterances");
      }
      for (const auto& ju : utts) {
        Utterance u;
        u.speaker = ju.at("speaker").get<std::string>();
        u.text = ju.at("text").get<std::string>();
        const auto name = ju.at("label").get<std::string>();
        const auto id = labels.find(name);
        if (!id) throw LabelError(where + ": unknown label '" + name + "'");
        u.label = *id;
        u.dialogue_id = d.dialogue_id;
        u.index_in_dialogue = d.utterances.size();
        d.utterances.push_back(std::move(u));
      }
      corpus.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LabelMap& labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_corpus(ss.str(), labels);
  } catch (const LabelError& e) {
    throw LabelError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string corpus_to_jsonl(const Corpus& corpus, const LabelMap& labels) {
  std::string out;
  for (const auto& d : corpus) {
    json obj;
    obj["dialogue_id"] = d.dialogue_id;
    obj["utterances"] = json::array();
    for (const auto& u : d.utterances) {
      obj["utterances"].push_back(
          {{"speaker", u.speaker}, {"text", u.text}, {"label", labels.name(u.label)}});
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

Vocab build_vocab(const Corpus& corpus, std::size_t min_freq) {
  if (corpus.empty()) throw ConfigError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& d : corpus)
    for (const auto& u : d.utterances)
      for (auto& t : splice_tokens(u, true)) ++counts[t];

  const Vocab reserved;
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts)
    if (n >= min_freq && !reserved.contains(tok)) kept.emplace_back(tok, n);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab vocab;
  for (auto& [tok, n] : kept) vocab.add(tok);
  return vocab;
}

std::vector<int> encode_utterance(const Utterance& u, const Vocab& vocab, bool use_speaker,
                                  std::size_t max_len) {
  if (max_len < 2) throw ConfigError("max_len must leave room for <s> and </s>");
  std::vector<int> ids{Vocab::kBos};
  for (const auto& t : splice_tokens(u, use_speaker)) {
    if (ids.size() + 1 >= max_len) break;
    ids.push_back(vocab.id(t));
  }
  ids.push_back(Vocab::kEos);
  return ids;
}

std::vector<std::string> decode_tokens(std::span<const int> ids, const Vocab& vocab) {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == Vocab::kBos || id == Vocab::kEos || id == Vocab::kPad) continue;
    out.push_back(vocab.token(id));
  }
  return out;
}

std::vector<std::span<const Utterance>> make_windows(const Dialogue& d, std::size_t window) {
  if (window < 2) {
    throw ConfigError("window size must be >= 2 so every window can form a contrastive batch");
  }
  std::vector<std::span<const Utterance>> out;
  const std::span<const Utterance> all(d.utterances);
  for (std::size_t begin = 0; begin < all.size(); begin += window) {
    out.push_back(all.subspan(begin, std::min(window, all.size() - begin)));
  }
  return out;
}

CorpusStats corpus_stats(const Corpus& corpus, const LabelMap& labels) {
  CorpusStats s;
  s.num_dialogues = corpus.size();
  s.num_classes = labels.size();
  s.class_counts.assign(labels.size(), 0);
  for (const auto& d : corpus) {
    s.num_utterances += d.utterances.size();
    for (const auto& u : d.utterances) {
      if (u.label < 0 || static_cast<std::size_t>(u.label) >= labels.size()) {
        throw IndexError("label id " + std::to_string(u.label) + " outside label map");
      }
      ++s.class_counts[static_cast<std::size_t>(u.label)];
    }
  }
  return s;
}

}  // namespace erc
