#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "erc/errors.hpp"
#include "erc/synthetic.hpp"
#include "erc/text.hpp"

using namespace erc;

namespace {

Utterance utt(std::string speaker, std::string text, int label = 0) {
  return {std::move(speaker), std::move(text), label, "d", 0};
}

Corpus one_line(const std::string& text) {
  return {Dialogue{"d0", {utt("", text)}}};
}

}  // namespace

TEST_CASE("tokenize lowercases and splits punctuation") {
  CHECK(tokenize("Hi, JOEY!  how's it?") ==
        std::vector<std::string>{"hi", ",", "joey", "!", "how", "'", "s", "it", "?"});
  CHECK(tokenize("   ").empty());
}

TEST_CASE("encode_utterance splices the speaker") {
  const Corpus corpus{Dialogue{"d0", {utt("Joey", "hi")}}};
  const auto vocab = build_vocab(corpus);
  const auto id = [&](const char* t) { return vocab.id(t); };

  CHECK(encode_utterance(utt("joey", "hi"), vocab, true) ==
        std::vector<int>{Vocab::kBos, id("joey"), id(":"), id("hi"), Vocab::kEos});
  CHECK(encode_utterance(utt("joey", "hi"), vocab, false) == std::vector<int>{Vocab::kBos, id("hi"), Vocab::kEos});
  CHECK(encode_utterance(utt("joey", "zzz"), vocab, false) ==
        std::vector<int>{Vocab::kBos, Vocab::kUnk, Vocab::kEos});
  // No separator without a speaker name.
  CHECK(encode_utterance(utt("", "hi"), vocab, true) == std::vector<int>{Vocab::kBos, id("hi"), Vocab::kEos});
}

TEST_CASE("encode_utterance truncation keeps the final </s>") {
  const auto corpus = one_line("a b c d e f g");
  const auto vocab = build_vocab(corpus);
  const auto ids = encode_utterance(corpus[0].utterances[0], vocab, false, 5);
  REQUIRE(ids.size() == 5);
  CHECK(ids.front() == Vocab::kBos);
  CHECK(ids.back() == Vocab::kEos);
  CHECK(decode_tokens(ids, vocab) == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("decode round-trips normalized tokens") {
  const auto corpus = make_cue_corpus(6, 4, 9);
  const auto vocab = build_vocab(corpus);
  for (const auto& d : corpus)
    for (const auto& u : d.utterances) {
      CHECK(decode_tokens(encode_utterance(u, vocab, true), vocab) == splice_tokens(u, true));
      CHECK(decode_tokens(encode_utterance(u, vocab, false), vocab) == tokenize(u.text));
    }
}

TEST_CASE("build_vocab ordering and threshold") {
  const auto corpus = one_line("hi hi you");
  const auto v1 = build_vocab(corpus, 1);
  REQUIRE(v1.size() == 6);
  CHECK(v1.token(4) == "hi");
  CHECK(v1.token(5) == "you");
  const auto v2 = build_vocab(corpus, 2);
  REQUIRE(v2.size() == 5);
  CHECK(v2.token(4) == "hi");
  CHECK(build_vocab(corpus, 1) == v1);
  CHECK(v1.token(Vocab::kBos) == "<s>");
  CHECK(v1.token(Vocab::kEos) == "</s>");
  CHECK(v1.token(Vocab::kPad) == "<pad>");
  CHECK(v1.token(Vocab::kUnk) == "<unk>");
  CHECK_THROWS_AS((void)build_vocab(Corpus{}), ConfigError);

  // Equal counts fall back to lexical order.
  const auto v3 = build_vocab(one_line("b a c a b c"));
  CHECK(v3.tokens() == std::vector<std::string>{"<s>", "</s>", "<pad>", "<unk>", "a", "b", "c"});
}

TEST_CASE("make_windows chunks in order") {
  Dialogue d{"d", {}};
  for (int i = 0; i < 5; ++i) d.utterances.push_back(utt("s", "t" + std::to_string(i)));
  const auto w = make_windows(d, 2);
  REQUIRE(w.size() == 3);
  CHECK(w[0].size() == 2);
  CHECK(w[1].size() == 2);
  CHECK(w[2].size() == 1);
  std::size_t k = 0;
  for (const auto& win : w)
    for (const auto& u : win) CHECK(&u == &d.utterances[k++]);
  CHECK(k == 5);

  Dialogue small{"s", {utt("a", "x"), utt("b", "y"), utt("a", "z")}};
  CHECK(make_windows(small, 8).size() == 1);
  CHECK(make_windows(small, 8)[0].size() == 3);
  CHECK_THROWS_AS((void)make_windows(small, 1), ConfigError);
}

TEST_CASE("parse_corpus formats and errors") {
  const auto labels = LabelMap::preset("meld");
  CHECK(parse_corpus("", labels).empty());
  const auto c = parse_corpus(
      R"({"dialogue_id":"a","utterances":[{"speaker":"x","text":"hi","label":"joy"},)"
      R"({"speaker":"y","text":"no","label":"anger"},{"speaker":"x","text":"ok","label":"neutral"}]})"
      "\n\n",
      labels);
  REQUIRE(c.size() == 1);
  REQUIRE(c[0].utterances.size() == 3);
  CHECK(c[0].utterances[1].label == labels.id("anger"));
  CHECK(c[0].utterances[2].index_in_dialogue == 2);
  CHECK(c[0].utterances[2].dialogue_id == "a");

  try {
    (void)parse_corpus("\n{not json}\n", labels);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(
      (void)parse_corpus(R"({"dialogue_id":"a","utterances":[{"speaker":"x","text":"hi","label":"glee"}]})",
                         labels),
      LabelError);
  CHECK_THROWS_AS((void)parse_corpus(R"({"dialogue_id":"a","utterances":[]})", labels), DataError);
  CHECK_THROWS_AS((void)load_corpus("/nonexistent/file.jsonl", labels), DataError);
}

TEST_CASE("corpus jsonl round trip") {
  const auto labels = synthetic_labels();
  const auto corpus = make_context_corpus(5, 3);
  const auto again = parse_corpus(corpus_to_jsonl(corpus, labels), labels);
  REQUIRE(again.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    REQUIRE(again[i].utterances.size() == corpus[i].utterances.size());
    for (std::size_t j = 0; j < corpus[i].utterances.size(); ++j) {
      CHECK(again[i].utterances[j].text == corpus[i].utterances[j].text);
      CHECK(again[i].utterances[j].speaker == corpus[i].utterances[j].speaker);
      CHECK(again[i].utterances[j].label == corpus[i].utterances[j].label);
    }
  }
}

TEST_CASE("corpus_stats counts by enumeration") {
  const LabelMap labels({"a", "b", "c"});
  const Corpus corpus{Dialogue{"x", {utt("p", "1", 0), utt("q", "2", 1), utt("p", "3", 1)}},
                      Dialogue{"y", {utt("p", "4", 2), utt("q", "5", 1)}}};
  const auto s = corpus_stats(corpus, labels);
  CHECK(s.num_dialogues == 2);
  CHECK(s.num_utterances == 5);
  CHECK(s.num_classes == 3);
  CHECK(s.class_counts == std::vector<std::size_t>{1, 3, 1});
}

TEST_CASE("label presets") {
  CHECK(LabelMap::preset("meld").size() == 7);
  CHECK(LabelMap::preset("emorynlp").size() == 7);
  CHECK(LabelMap::preset("dailydialog").size() == 7);
  CHECK(LabelMap::preset("iemocap").size() == 6);
  CHECK(LabelMap::preset("dailydialog").excluded_name() == std::optional<std::string>("neutral"));
  CHECK_FALSE(LabelMap::preset("meld").excluded_id().has_value());
  CHECK_THROWS_AS((void)LabelMap::preset("unknown"), ConfigError);
  CHECK_THROWS_AS((void)LabelMap::preset("meld").id("glee"), LabelError);
  CHECK_THROWS_AS(LabelMap({"a", "a"}), ConfigError);
  CHECK_THROWS_AS(LabelMap({"a"}, "b"), ConfigError);
}
