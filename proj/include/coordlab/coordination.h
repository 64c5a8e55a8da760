#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coordlab/corpus.h"
#include "coordlab/lexicon.h"

namespace coordlab {

struct CoordinationConfig {
  // A speaker/marker value is defined once the targets exhibited the marker at
  // least min_exhibits times over at least min_exchanges exchanges.
  int min_exhibits = 1;
  int min_exchanges = 1;
};

// Per-speaker, per-marker coordination with its supporting counts.
// value = n_both/n_target_exhibits - n_reply_exhibits/n_total.
struct MarkerCoordination {
  Marker marker = Marker::articles;
  bool defined = false;
  double value = 0.0;
  std::int64_t n_total = 0;
  std::int64_t n_target_exhibits = 0;
  std::int64_t n_both = 0;
  std::int64_t n_reply_exhibits = 0;
};

enum class AggScheme : int { one = 1, two = 2, three = 3 };

struct SpeakerProfile {
  std::string speaker_id;
  std::array<MarkerCoordination, kNumMarkers> per_marker;
  std::optional<double> agg1, agg2, agg3;
  std::int64_t n_exchanges = 0;

  int defined_markers() const;
};

struct GroupMeanResult {
  std::optional<double> mean;  // unweighted mean over speakers with a defined value
  int population = 0;          // speakers contributing to the mean
  std::vector<std::pair<std::string, std::optional<double>>> per_speaker;
};

struct GroupProfile {
  std::string speaker_group;
  std::string target_group;
  std::array<std::optional<double>, kNumMarkers> marker_means;
  std::array<int, kNumMarkers> marker_populations{};
  std::optional<double> agg1_mean, agg2_mean, agg3_mean;
  int agg1_population = 0;
  int agg2_population = 0;
  int agg3_population = 0;
  std::int64_t n_exchanges = 0;
  std::string filters;
  std::vector<SpeakerProfile> speakers;  // sorted by speaker_id

  // Per-speaker defined values for a metric name ("articles", ..., "agg1").
  std::vector<double> samples(const std::string& metric) const;
  std::optional<double> metric_mean(const std::string& metric) const;
  int metric_population(const std::string& metric) const;
};

// Metric row order used by every export: 8 markers then agg1..agg3.
const std::vector<std::string>& metric_names();

// Counts over the given exchange set (callers arrange that replies belong to
// one speaker and targets to the group of interest).
MarkerCoordination coord_marker(const ExchangeSet& exchanges, Marker m,
                                const CoordinationConfig& config = {});

// All eight markers in one pass.
std::array<MarkerCoordination, kNumMarkers> coord_markers(const ExchangeSet& exchanges,
                                                          const CoordinationConfig& config = {});

// Group coordination for one marker: splits the set by reply speaker,
// computes each speaker's value and macro-averages the defined ones.
// Throws EmptyGroup when no speaker has a defined value.
GroupMeanResult coord_group(const ExchangeSet& exchanges, Marker m,
                            const CoordinationConfig& config = {});

// Aggregate a speaker's eight marker values under the given scheme. Scheme 2
// fills missing markers from group_means and throws MissingGroupMean when a
// needed mean is itself undefined.
std::optional<double> aggregate_speaker(
    const std::array<MarkerCoordination, kNumMarkers>& per_marker, AggScheme scheme,
    const std::array<std::optional<double>, kNumMarkers>& group_means);

struct ProfileRequest {
  Group speakers;
  Group targets;
  FilterSpec filters;
  // Pair-level selection (favorable/unfavorable, same/diff vote): when set,
  // an exchange is kept only if its (speaker, target) pair matches.
  std::optional<PairGroup> pairs;
  CoordinationConfig config;
};

// Full per-group table: marker means, aggregates, populations, per-speaker
// detail. Deterministic: speakers ascending, exchanges in corpus order.
GroupProfile coordination_profile(const Corpus& corpus, const ProfileRequest& request);

}  // namespace coordlab
