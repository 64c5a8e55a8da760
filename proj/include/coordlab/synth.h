#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coordlab/corpus.h"
#include "coordlab/lexicon.h"

namespace coordlab {

// Generative model per exchange and marker m: the target utterance exhibits m
// with the target group's rate q; the reply exhibits it with p + delta when
// the target did and with p otherwise. Closed form for the coordination
// measure under this model:
//   C = P(reply | target) - P(reply) = (p+delta) - (p + q*delta) = delta*(1-q)
struct SynthGroup {
  std::string name;
  int size = 1;
  std::vector<std::string> labels;
  std::array<double, kNumMarkers> baseline_p{};   // reply rate without trigger
  std::array<double, kNumMarkers> delta{};        // trigger boost
  std::array<double, kNumMarkers> exhibit_q{};    // rate when initiating
  std::string vocab_prefix;                       // extra role vocabulary
  int vocab_size = 0;
  struct Event {
    std::string role;
    std::int64_t at = 0;
    std::array<double, kNumMarkers> delta_after{};
  };
  std::optional<Event> event;  // promotion event + delta schedule
};

struct SynthLane {
  std::string speakers;
  std::string targets;
  int exchanges_per_speaker = 1;
};

// Mutually conversing (high, low) couples for the prediction task; pair i
// joins member i of each group, so pairs <= min(size, size).
struct SynthPairLane {
  std::string high;
  std::string low;
  int pairs = 1;
  int exchanges_each_way = 1;
};

struct GenSpec {
  std::uint64_t seed = 0;
  std::string domain = "synth";
  std::int64_t time_start = 1'000'000'000;
  std::int64_t time_end = 1'031'536'000;
  std::string base_vocab_prefix = "w";
  int base_vocab_size = 100;
  int fillers_per_utterance = 8;
  std::vector<SynthGroup> groups;
  std::vector<SynthLane> lanes;
  std::vector<SynthPairLane> pair_lanes;

  static GenSpec from_json_text(const std::string& text);
  static GenSpec from_file(const std::string& path);
  std::string to_json_text() const;

  const SynthGroup& group(const std::string& name) const;
  // Throws InvalidSpec on out-of-range rates or broken references.
  void validate() const;
};

struct SynthOutput {
  std::string utterances_jsonl;
  std::string participants_jsonl;
};

// Deterministic given the spec (independent per-speaker substreams). The
// output is valid corpus-module input.
SynthOutput generate(const GenSpec& spec, const Lexicon& lexicon);

Corpus load_generated(const SynthOutput& out, const Lexicon& lexicon,
                      const LoadOptions& options = {});

// delta_speaker * (1 - q_target) for the marker, using the post-event delta
// when after_event is set.
double expected_coordination(const GenSpec& spec, const std::string& speaker_group,
                             const std::string& target_group, Marker m,
                             bool after_event = false);

// Expected values for every lane and pair-lane direction, as written next to
// generated corpora by the CLI.
std::string oracle_json_text(const GenSpec& spec);

}  // namespace coordlab
