#pragma once

#include <cstddef>
#include <cstdint>

#include "erc/text.hpp"

namespace erc {

/// Labels of both synthetic corpora.
LabelMap synthetic_labels();

/// Dialogues whose every utterance carries one cue word naming its label,
/// surrounded by random filler words. Two speakers alternate turns.
Corpus make_cue_corpus(std::size_t dialogues, std::size_t utterances_per_dialogue, std::uint64_t seed);

/// Dialogues of the form [cue a, ambiguous, cue b, ambiguous]. An ambiguous
/// utterance contains no cue and takes the label of the cue right before it,
/// so only context can classify it. Meant for windows of two utterances.
Corpus make_context_corpus(std::size_t dialogues, std::uint64_t seed);

}  // namespace erc
