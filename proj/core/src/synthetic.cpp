#include "erc/synthetic.hpp"

#include <array>
#include <random>
#include <string>

namespace erc {

namespace {

constexpr std::array<const char*, 4> kLabels = {"joy", "anger", "sadness", "fear"};
constexpr std::array<const char*, 4> kCues = {"yay", "grr", "sob", "eek"};
constexpr std::array<const char*, 12> kFiller = {"the",   "we",    "it",   "was",   "then", "so",
                                                 "today", "really", "maybe", "okay", "well", "now"};
constexpr std::array<const char*, 2> kSpeakers = {"alice", "bob"};

using Engine = std::mt19937_64;

std::size_t draw(Engine& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

// Two or three filler words with `cue` inserted at a random position.
std::string sentence(Engine& rng, const char* cue) {
  std::vector<std::string> words;
  const std::size_t n = 2 + draw(rng, 2);
  for (std::size_t i = 0; i < n; ++i) words.emplace_back(kFiller[draw(rng, kFiller.size())]);
  if (cue) words.insert(words.begin() + static_cast<std::ptrdiff_t>(draw(rng, n + 1)), cue);
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

Utterance make(const std::string& dialogue_id, std::size_t index, int label, std::string text) {
  return {kSpeakers[index % 2], std::move(text), label, dialogue_id, index};
}

}  // namespace

LabelMap synthetic_labels() { return LabelMap({kLabels.begin(), kLabels.end()}); }

Corpus make_cue_corpus(std::size_t dialogues, std::size_t utterances_per_dialogue, std::uint64_t seed) {
  Engine rng(seed);
  Corpus corpus;
  for (std::size_t d = 0; d < dialogues; ++d) {
    Dialogue dlg{"cue" + std::to_string(d), {}};
    for (std::size_t i = 0; i < utterances_per_dialogue; ++i) {
      const int label = static_cast<int>(draw(rng, kLabels.size()));
      dlg.utterances.push_back(make(dlg.dialogue_id, i, label, sentence(rng, kCues[label])));
    }
    corpus.push_back(std::move(dlg));
  }
  return corpus;
}

Corpus make_context_corpus(std::size_t dialogues, std::uint64_t seed) {
  Engine rng(seed);
  Corpus corpus;
  for (std::size_t d = 0; d < dialogues; ++d) {
    Dialogue dlg{"ctx" + std::to_string(d), {}};
    for (std::size_t pair = 0; pair < 2; ++pair) {
      const int label = static_cast<int>(draw(rng, kLabels.size()));
      const std::size_t i = dlg.utterances.size();
      dlg.utterances.push_back(make(dlg.dialogue_id, i, label, sentence(rng, kCues[label])));
      dlg.utterances.push_back(make(dlg.dialogue_id, i + 1, label, "hmm " + sentence(rng, nullptr)));
    }
    corpus.push_back(std::move(dlg));
  }
  return corpus;
}

}  // namespace erc
