#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "coordlab/lexicon.h"

namespace coordlab {

struct Utterance {
  std::string id;
  std::string conversation_id;
  std::string speaker_id;
  std::optional<std::string> reply_to;
  std::optional<std::int64_t> timestamp;  // unix seconds
  std::string text;
  TokenSequence tokens;            // derived
  std::uint8_t exhibit_mask = 0;   // derived, bit i = marker i

  bool exhibits(int marker) const { return (exhibit_mask >> marker) & 1u; }
  bool exhibits(Marker m) const { return exhibits(static_cast<int>(m)); }
};

struct StatusEvent {
  enum class Outcome { promoted, failed };
  std::string role;
  std::int64_t at = 0;
  Outcome outcome = Outcome::promoted;
};

struct Participant {
  std::string id;
  std::set<std::string> group_labels;
  std::vector<StatusEvent> status_events;        // sorted by time
  std::map<std::string, std::string> stances;    // case/discussion id -> side
  std::map<std::string, std::string> attrs;

  bool has_label(const std::string& label) const { return group_labels.count(label) > 0; }
  std::optional<std::int64_t> promoted_at(const std::string& role) const;
};

struct CaseRecord {
  std::string case_id;
  std::map<std::string, std::string> lawyer_sides;   // lawyer id -> side
  std::map<std::string, std::string> justice_votes;  // justice id -> side
};

struct CorpusWarnings {
  std::size_t self_replies_skipped = 0;
  std::size_t cross_conversation_replies_skipped = 0;
};

struct LoadOptions {
  // Court-style identity: suffix every speaker id with "@<conversation>" so
  // each appearance in a different case counts as a separate entity.
  bool per_case_identity = false;
};

class Corpus {
public:
  static Corpus load(std::istream& utterances, std::istream* participants,
                     std::istream* cases, const Lexicon& lexicon,
                     const LoadOptions& options = {});
  static Corpus load_files(const std::string& utterances_path,
                           const std::string& participants_path,  // "" = none
                           const std::string& cases_path,         // "" = none
                           const Lexicon& lexicon, const LoadOptions& options = {});

  const std::vector<Utterance>& utterances() const { return utterances_; }
  const Utterance* utterance_by_id(const std::string& id) const;
  const std::map<std::string, Participant>& participants() const { return participants_; }
  const std::map<std::string, CaseRecord>& cases() const { return cases_; }
  const CorpusWarnings& warnings() const { return warnings_; }
  const Lexicon& lexicon() const { return *lexicon_; }
  bool per_case_identity() const { return per_case_identity_; }

  // Participant record for an id; ids seen only in utterances get an implicit
  // empty record.
  const Participant& participant(const std::string& id) const;

  // Number of reply utterances authored by each speaker.
  const std::map<std::string, std::size_t>& reply_counts() const { return reply_counts_; }

private:
  std::vector<Utterance> utterances_;
  std::unordered_map<std::string, std::size_t> index_by_id_;
  std::map<std::string, Participant> participants_;
  std::map<std::string, CaseRecord> cases_;
  std::map<std::string, std::size_t> reply_counts_;
  CorpusWarnings warnings_;
  const Lexicon* lexicon_ = nullptr;
  bool per_case_identity_ = false;

  friend class ExchangeSet;
};

struct Exchange {
  const Utterance* target;  // u1, by a
  const Utterance* reply;   // u2, by b
};

class ExchangeSet {
public:
  ExchangeSet() = default;
  ExchangeSet(const Corpus* corpus, std::vector<std::pair<std::uint32_t, std::uint32_t>> idx,
              std::string description)
      : corpus_(corpus), idx_(std::move(idx)), description_(std::move(description)) {}

  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  Exchange at(std::size_t i) const {
    return {&corpus_->utterances_[idx_[i].first], &corpus_->utterances_[idx_[i].second]};
  }
  const std::string& description() const { return description_; }
  const Corpus* corpus() const { return corpus_; }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& indices() const { return idx_; }

private:
  const Corpus* corpus_ = nullptr;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> idx_;  // (target, reply)
  std::string description_;
};

using SpeakerPredicate = std::function<bool(const std::string&)>;

// One exchange per utterance with a reply_to, in corpus order. Filters (when
// given) apply to the reply speaker and the target speaker respectively.
ExchangeSet derive_exchanges(const Corpus& corpus,
                             const SpeakerPredicate& speaker_filter = nullptr,
                             const SpeakerPredicate& target_filter = nullptr);

// True iff some n-gram of the reply also occurs in the target and contains at
// least one lexeme of c.
bool has_ngram_repeat(const Exchange& e, int n, const MarkerCategory& c);

struct TimeWindowFilter {
  enum class Side { before, after };
  enum class Anchor { speaker, target };
  std::string role;           // status event that anchors the window
  Side side = Side::after;
  int buffer_days = 30;       // gap between the event and the "after" side
  Anchor anchor = Anchor::speaker;
};

struct NgramRepeatFilter {
  int n = 3;
  Marker category = Marker::conjunctions;
};

struct FilterSpec {
  std::optional<int> max_len_diff;  // keep iff |len(target)-len(reply)| < value
  std::optional<TimeWindowFilter> time_window;
  std::optional<NgramRepeatFilter> exclude_ngram_repeats;

  bool empty() const {
    return !max_len_diff && !time_window && !exclude_ngram_repeats;
  }
  std::string describe() const;
};

struct FilterStats {
  std::size_t excluded_len_diff = 0;
  std::size_t excluded_window = 0;
  std::size_t missing_timestamp = 0;  // excluded because a time filter was active
  std::size_t excluded_ngram_repeat = 0;
};

ExchangeSet filter_exchanges(const ExchangeSet& s, const FilterSpec& spec,
                             FilterStats* stats = nullptr);

// --- group partitions -------------------------------------------------------

struct TimeWindow {
  std::string role;
  TimeWindowFilter::Side side = TimeWindowFilter::Side::after;
  int buffer_days = 30;
};

struct Group {
  std::string label;
  std::set<std::string> members;
  // When set, membership is time-sliced around each member's own status event.
  std::optional<TimeWindow> window;
};

// Pair-level grouping (favorable/unfavorable, same/diff vote): an edge names
// two participants and, optionally, the conversation/case it is scoped to.
struct PairEdge {
  std::string a;        // lawyer / first voter
  std::string b;        // justice / second voter
  std::string context;  // case or discussion id; empty = any conversation
};

struct PairGroup {
  std::string label;
  std::vector<PairEdge> edges;

  bool matches(const std::string& speaker, const std::string& target,
               const std::string& conversation_id) const;
};

struct GroupPartition {
  std::string scheme;
  std::vector<Group> groups;          // member-based schemes
  std::vector<PairGroup> pair_groups; // pair-based schemes
};

struct GroupScheme {
  enum class Kind {
    by_role,
    before_after,
    favorable_unfavorable,
    same_diff_vote,
    volume_tertiles,
    by_attr,
  };
  Kind kind = Kind::by_role;
  std::vector<std::string> labels;  // by_role
  std::string role;                 // before_after
  int buffer_days = 30;             // before_after
  std::string attr_key;             // by_attr

  static GroupScheme by_role(std::vector<std::string> labels);
  static GroupScheme before_after(std::string role, int buffer_days = 30);
  static GroupScheme favorable_unfavorable();
  static GroupScheme same_diff_vote();
  static GroupScheme volume_tertiles();
  static GroupScheme by_attr(std::string key);
  // "by_role:admin,non-admin", "before_after:admin:30", "volume_tertiles",
  // "favorable_unfavorable", "same_diff_vote", "by_attr:gender"
  static GroupScheme parse(const std::string& text);
};

GroupPartition partition_groups(const Corpus& corpus, const GroupScheme& scheme);

// Everyone mentioned in the corpus (participant records plus utterance
// speakers), as a Group labeled "*".
Group universe_group(const Corpus& corpus);
// Participants carrying `label`; "*" yields the universe group.
Group label_group(const Corpus& corpus, const std::string& label);

}  // namespace coordlab
