#include "coordlab/corpus.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coordlab/error.h"

namespace coordlab {

using nlohmann::json;

std::optional<std::int64_t> Participant::promoted_at(const std::string& role) const {
  for (const auto& ev : status_events) {
    if (ev.role == role && ev.outcome == StatusEvent::Outcome::promoted) return ev.at;
  }
  return std::nullopt;
}

namespace {

[[noreturn]] void malformed(const std::string& source, std::size_t lineno, const std::string& what) {
  throw_data("MalformedRecord", source + ":" + std::to_string(lineno) + ": " + what);
}

json parse_line(const std::string& line, const std::string& source, std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) malformed(source, lineno, "not a JSON object");
  return j;
}

std::string require_string(const json& j, const char* field, const std::string& source,
                           std::size_t lineno) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    malformed(source, lineno, std::string("missing or non-string field '") + field + "'");
  }
  return it->get<std::string>();
}

void parse_participant(const json& j, Participant& p, const std::string& source,
                       std::size_t lineno) {
  if (auto it = j.find("labels"); it != j.end() && it->is_array()) {
    for (const auto& l : *it) {
      if (!l.is_string()) malformed(source, lineno, "labels must be strings");
      p.group_labels.insert(l.get<std::string>());
    }
  }
  if (auto it = j.find("status_events"); it != j.end() && it->is_array()) {
    for (const auto& e : *it) {
      if (!e.is_object()) malformed(source, lineno, "status_events entries must be objects");
      StatusEvent ev;
      ev.role = require_string(e, "role", source, lineno);
      if (auto at = e.find("at"); at != e.end() && at->is_number()) {
        ev.at = at->get<std::int64_t>();
      } else {
        malformed(source, lineno, "status event needs integer 'at'");
      }
      std::string outcome = require_string(e, "outcome", source, lineno);
      if (outcome == "promoted") {
        ev.outcome = StatusEvent::Outcome::promoted;
      } else if (outcome == "failed") {
        ev.outcome = StatusEvent::Outcome::failed;
      } else {
        malformed(source, lineno, "status event outcome must be promoted|failed");
      }
      p.status_events.push_back(std::move(ev));
    }
  }
  std::stable_sort(p.status_events.begin(), p.status_events.end(),
                   [](const StatusEvent& a, const StatusEvent& b) { return a.at < b.at; });
  std::set<std::string> promoted_roles;
  for (const auto& ev : p.status_events) {
    if (ev.outcome != StatusEvent::Outcome::promoted) continue;
    if (!promoted_roles.insert(ev.role).second) {
      malformed(source, lineno, "participant '" + p.id + "' promoted twice for role '" + ev.role + "'");
    }
  }
  if (auto it = j.find("stances"); it != j.end() && it->is_object()) {
    for (auto& [k, v] : it->items()) {
      if (!v.is_string()) malformed(source, lineno, "stances values must be strings");
      p.stances[k] = v.get<std::string>();
    }
  }
  if (auto it = j.find("attrs"); it != j.end() && it->is_object()) {
    for (auto& [k, v] : it->items()) {
      if (!v.is_string()) malformed(source, lineno, "attrs values must be strings");
      p.attrs[k] = v.get<std::string>();
    }
  }
}

}  // namespace

Corpus Corpus::load(std::istream& utterances, std::istream* participants, std::istream* cases,
                    const Lexicon& lexicon, const LoadOptions& options) {
  Corpus c;
  c.lexicon_ = &lexicon;
  c.per_case_identity_ = options.per_case_identity;

  std::string line;
  std::size_t lineno = 0;
  struct PendingReply { std::size_t utterance_index; std::size_t lineno; };
  std::vector<PendingReply> pending;
  while (std::getline(utterances, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, "utterances", lineno);
    Utterance u;
    u.id = require_string(j, "id", "utterances", lineno);
    u.conversation_id = require_string(j, "conv_id", "utterances", lineno);
    u.speaker_id = require_string(j, "speaker", "utterances", lineno);
    if (options.per_case_identity) u.speaker_id += "@" + u.conversation_id;
    if (auto it = j.find("reply_to"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) malformed("utterances", lineno, "reply_to must be string or null");
      u.reply_to = it->get<std::string>();
    }
    if (auto it = j.find("ts"); it != j.end() && !it->is_null()) {
      if (!it->is_number_integer()) malformed("utterances", lineno, "ts must be integer or null");
      u.timestamp = it->get<std::int64_t>();
    }
    u.text = require_string(j, "text", "utterances", lineno);
    u.tokens = tokenize(u.text);
    u.exhibit_mask = lexicon.exhibit_mask(u.tokens);
    if (c.index_by_id_.count(u.id)) {
      throw_data("DuplicateId", "utterances:" + std::to_string(lineno) + ": duplicate id '" + u.id + "'");
    }
    c.index_by_id_[u.id] = c.utterances_.size();
    if (u.reply_to) pending.push_back({c.utterances_.size(), lineno});
    c.utterances_.push_back(std::move(u));
  }

  // Resolve replies: unknown target is an error; self-replies and replies
  // crossing conversations are dropped with a warning count.
  std::vector<bool> drop(c.utterances_.size(), false);
  for (const auto& [i, ln] : pending) {
    const Utterance& u = c.utterances_[i];
    auto it = c.index_by_id_.find(*u.reply_to);
    if (it == c.index_by_id_.end()) {
      throw_data("DanglingReply", "utterances:" + std::to_string(ln) + ": reply_to '" +
                                      *u.reply_to + "' references unknown utterance");
    }
    const Utterance& target = c.utterances_[it->second];
    if (target.speaker_id == u.speaker_id) {
      drop[i] = true;
      ++c.warnings_.self_replies_skipped;
    } else if (target.conversation_id != u.conversation_id) {
      drop[i] = true;
      ++c.warnings_.cross_conversation_replies_skipped;
    }
  }
  if (std::find(drop.begin(), drop.end(), true) != drop.end()) {
    std::vector<Utterance> kept;
    kept.reserve(c.utterances_.size());
    c.index_by_id_.clear();
    for (std::size_t i = 0; i < c.utterances_.size(); ++i) {
      if (drop[i]) continue;
      c.index_by_id_[c.utterances_[i].id] = kept.size();
      kept.push_back(std::move(c.utterances_[i]));
    }
    c.utterances_ = std::move(kept);
  }

  for (const Utterance& u : c.utterances_) {
    if (u.reply_to) ++c.reply_counts_[u.speaker_id];
  }

  if (participants) {
    lineno = 0;
    while (std::getline(*participants, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j = parse_line(line, "participants", lineno);
      Participant p;
      p.id = require_string(j, "id", "participants", lineno);
      if (c.participants_.count(p.id)) {
        throw_data("DuplicateId",
                   "participants:" + std::to_string(lineno) + ": duplicate id '" + p.id + "'");
      }
      parse_participant(j, p, "participants", lineno);
      c.participants_.emplace(p.id, std::move(p));
    }
  }

  if (cases) {
    lineno = 0;
    while (std::getline(*cases, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j = parse_line(line, "cases", lineno);
      CaseRecord rec;
      rec.case_id = require_string(j, "case_id", "cases", lineno);
      if (c.cases_.count(rec.case_id)) {
        throw_data("DuplicateId",
                   "cases:" + std::to_string(lineno) + ": duplicate case '" + rec.case_id + "'");
      }
      auto read_sides = [&](const char* field, std::map<std::string, std::string>& out) {
        if (auto it = j.find(field); it != j.end() && it->is_object()) {
          for (auto& [k, v] : it->items()) {
            if (!v.is_string()) malformed("cases", lineno, std::string(field) + " values must be strings");
            out[k] = v.get<std::string>();
          }
        }
      };
      read_sides("lawyer_sides", rec.lawyer_sides);
      read_sides("justice_votes", rec.justice_votes);
      std::set<std::string> sides;
      for (const auto& [k, v] : rec.lawyer_sides) sides.insert(v);
      for (const auto& [k, v] : rec.justice_votes) sides.insert(v);
      if (sides.size() > 2) {
        malformed("cases", lineno, "case '" + rec.case_id + "' uses more than two side labels");
      }
      c.cases_.emplace(rec.case_id, std::move(rec));
    }
  }

  // Per-case identity: clone base participant metadata onto each suffixed id
  // seen in the utterances.
  if (options.per_case_identity) {
    std::map<std::string, Participant> derived;
    for (const Utterance& u : c.utterances_) {
      if (derived.count(u.speaker_id)) continue;
      std::string base = u.speaker_id.substr(0, u.speaker_id.rfind('@'));
      Participant p;
      auto it = c.participants_.find(base);
      if (it != c.participants_.end()) {
        p = it->second;
      }
      p.id = u.speaker_id;
      derived.emplace(u.speaker_id, std::move(p));
    }
    c.participants_ = std::move(derived);
  }

  return c;
}

Corpus Corpus::load_files(const std::string& utterances_path, const std::string& participants_path,
                          const std::string& cases_path, const Lexicon& lexicon,
                          const LoadOptions& options) {
  std::ifstream utt(utterances_path);
  if (!utt) throw_data("IoError", "cannot open utterances file: " + utterances_path);
  std::ifstream parts, cases;
  std::istream* parts_ptr = nullptr;
  std::istream* cases_ptr = nullptr;
  if (!participants_path.empty()) {
    parts.open(participants_path);
    if (!parts) throw_data("IoError", "cannot open participants file: " + participants_path);
    parts_ptr = &parts;
  }
  if (!cases_path.empty()) {
    cases.open(cases_path);
    if (!cases) throw_data("IoError", "cannot open cases file: " + cases_path);
    cases_ptr = &cases;
  }
  return load(utt, parts_ptr, cases_ptr, lexicon, options);
}

const Utterance* Corpus::utterance_by_id(const std::string& id) const {
  auto it = index_by_id_.find(id);
  return it == index_by_id_.end() ? nullptr : &utterances_[it->second];
}

const Participant& Corpus::participant(const std::string& id) const {
  static const Participant empty;
  auto it = participants_.find(id);
  return it == participants_.end() ? empty : it->second;
}

ExchangeSet derive_exchanges(const Corpus& corpus, const SpeakerPredicate& speaker_filter,
                             const SpeakerPredicate& target_filter) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> idx;
  const auto& utts = corpus.utterances();
  for (std::size_t i = 0; i < utts.size(); ++i) {
    const Utterance& reply = utts[i];
    if (!reply.reply_to) continue;
    const Utterance* target = corpus.utterance_by_id(*reply.reply_to);
    if (!target) continue;  // load() guarantees this; filters may re-derive
    if (speaker_filter && !speaker_filter(reply.speaker_id)) continue;
    if (target_filter && !target_filter(target->speaker_id)) continue;
    idx.emplace_back(static_cast<std::uint32_t>(target - utts.data()),
                     static_cast<std::uint32_t>(i));
  }
  return ExchangeSet(&corpus, std::move(idx), "derived");
}

bool has_ngram_repeat(const Exchange& e, int n, const MarkerCategory& c) {
  const auto& t = e.target->tokens.tokens;
  const auto& r = e.reply->tokens.tokens;
  if (n < 2 || t.size() < static_cast<std::size_t>(n) || r.size() < static_cast<std::size_t>(n)) {
    return false;
  }
  auto join = [](const std::vector<std::string>& v, std::size_t from, int len) {
    std::string s;
    for (int k = 0; k < len; ++k) {
      if (k) s.push_back('\x1f');
      s += v[from + k];
    }
    return s;
  };
  std::unordered_set<std::string> target_grams;
  for (std::size_t i = 0; i + n <= t.size(); ++i) target_grams.insert(join(t, i, n));
  for (std::size_t i = 0; i + n <= r.size(); ++i) {
    bool has_marker = false;
    for (int k = 0; k < n && !has_marker; ++k) has_marker = c.contains(r[i + k]);
    if (!has_marker) continue;
    if (target_grams.count(join(r, i, n))) return true;
  }
  return false;
}

std::string FilterSpec::describe() const {
  std::ostringstream os;
  os << "filters:";
  if (max_len_diff) os << " max_len_diff<" << *max_len_diff;
  if (time_window) {
    os << " window(" << (time_window->side == TimeWindowFilter::Side::before ? "before" : "after")
       << " " << time_window->role << ", buffer " << time_window->buffer_days << "d, anchor "
       << (time_window->anchor == TimeWindowFilter::Anchor::speaker ? "speaker" : "target") << ")";
  }
  if (exclude_ngram_repeats) {
    os << " no_" << exclude_ngram_repeats->n << "gram_repeats("
       << marker_name(exclude_ngram_repeats->category) << ")";
  }
  if (empty()) os << " none";
  return os.str();
}

namespace {

constexpr std::int64_t kDaySeconds = 86400;

// Exchange time is the reply's timestamp.
bool window_keeps(const TimeWindowFilter& w, const Corpus& corpus, const Exchange& e,
                  FilterStats* stats) {
  const std::string& who =
      w.anchor == TimeWindowFilter::Anchor::speaker ? e.reply->speaker_id : e.target->speaker_id;
  auto event_at = corpus.participant(who).promoted_at(w.role);
  if (!event_at) return false;
  if (!e.reply->timestamp) {
    if (stats) ++stats->missing_timestamp;
    return false;
  }
  std::int64_t ts = *e.reply->timestamp;
  if (w.side == TimeWindowFilter::Side::before) return ts < *event_at;
  return ts >= *event_at + static_cast<std::int64_t>(w.buffer_days) * kDaySeconds;
}

}  // namespace

ExchangeSet filter_exchanges(const ExchangeSet& s, const FilterSpec& spec, FilterStats* stats) {
  const Corpus& corpus = *s.corpus();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> idx;
  idx.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    Exchange e = s.at(i);
    if (spec.max_len_diff) {
      auto d = static_cast<std::int64_t>(e.target->tokens.size()) -
               static_cast<std::int64_t>(e.reply->tokens.size());
      if (std::abs(d) >= *spec.max_len_diff) {
        if (stats) ++stats->excluded_len_diff;
        continue;
      }
    }
    if (spec.time_window && !window_keeps(*spec.time_window, corpus, e, stats)) {
      if (stats) ++stats->excluded_window;
      continue;
    }
    if (spec.exclude_ngram_repeats) {
      const MarkerCategory& cat =
          corpus.lexicon().category(spec.exclude_ngram_repeats->category);
      if (has_ngram_repeat(e, spec.exclude_ngram_repeats->n, cat)) {
        if (stats) ++stats->excluded_ngram_repeat;
        continue;
      }
    }
    idx.push_back(s.indices()[i]);
  }
  return ExchangeSet(&corpus, std::move(idx), s.description() + "; " + spec.describe());
}

bool PairGroup::matches(const std::string& speaker, const std::string& target,
                        const std::string& conversation_id) const {
  for (const PairEdge& e : edges) {
    bool people_match = (e.a == speaker && e.b == target) || (e.a == target && e.b == speaker);
    if (!people_match) continue;
    if (e.context.empty() || e.context == conversation_id) return true;
  }
  return false;
}

GroupScheme GroupScheme::by_role(std::vector<std::string> labels) {
  GroupScheme s;
  s.kind = Kind::by_role;
  s.labels = std::move(labels);
  return s;
}
GroupScheme GroupScheme::before_after(std::string role, int buffer_days) {
  GroupScheme s;
  s.kind = Kind::before_after;
  s.role = std::move(role);
  s.buffer_days = buffer_days;
  return s;
}
GroupScheme GroupScheme::favorable_unfavorable() {
  GroupScheme s;
  s.kind = Kind::favorable_unfavorable;
  return s;
}
GroupScheme GroupScheme::same_diff_vote() {
  GroupScheme s;
  s.kind = Kind::same_diff_vote;
  return s;
}
GroupScheme GroupScheme::volume_tertiles() {
  GroupScheme s;
  s.kind = Kind::volume_tertiles;
  return s;
}
GroupScheme GroupScheme::by_attr(std::string key) {
  GroupScheme s;
  s.kind = Kind::by_attr;
  s.attr_key = std::move(key);
  return s;
}

GroupScheme GroupScheme::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  const std::string& name = parts[0];
  auto split_commas = [](const std::string& s) {
    std::vector<std::string> out;
    std::string c;
    for (char ch : s) {
      if (ch == ',') {
        out.push_back(c);
        c.clear();
      } else {
        c.push_back(ch);
      }
    }
    out.push_back(c);
    return out;
  };
  if (name == "by_role") {
    if (parts.size() != 2 || parts[1].empty()) {
      throw_config("UnknownScheme", "by_role needs labels: by_role:admin,non-admin");
    }
    return by_role(split_commas(parts[1]));
  }
  if (name == "before_after") {
    if (parts.size() < 2 || parts[1].empty()) {
      throw_config("UnknownScheme", "before_after needs a role: before_after:admin[:buffer_days]");
    }
    int buffer = 30;
    if (parts.size() >= 3) buffer = std::stoi(parts[2]);
    return before_after(parts[1], buffer);
  }
  if (name == "favorable_unfavorable") return favorable_unfavorable();
  if (name == "same_diff_vote") return same_diff_vote();
  if (name == "volume_tertiles") return volume_tertiles();
  if (name == "by_attr") {
    if (parts.size() != 2 || parts[1].empty()) {
      throw_config("UnknownScheme", "by_attr needs a key: by_attr:gender");
    }
    return by_attr(parts[1]);
  }
  throw_config("UnknownScheme", "unknown group scheme '" + name + "'");
}

Group universe_group(const Corpus& corpus) {
  Group g;
  g.label = "*";
  for (const auto& [id, p] : corpus.participants()) g.members.insert(id);
  for (const Utterance& u : corpus.utterances()) g.members.insert(u.speaker_id);
  return g;
}

Group label_group(const Corpus& corpus, const std::string& label) {
  if (label == "*") return universe_group(corpus);
  Group g;
  g.label = label;
  for (const auto& [id, p] : corpus.participants()) {
    if (p.has_label(label)) g.members.insert(id);
  }
  return g;
}

GroupPartition partition_groups(const Corpus& corpus, const GroupScheme& scheme) {
  GroupPartition out;
  switch (scheme.kind) {
    case GroupScheme::Kind::by_role: {
      out.scheme = "by_role";
      std::map<std::string, std::vector<std::string>> seen_in;  // member -> labels
      for (const std::string& label : scheme.labels) {
        Group g = label_group(corpus, label);
        for (const auto& m : g.members) seen_in[m].push_back(label);
        out.groups.push_back(std::move(g));
      }
      for (const auto& [m, labels] : seen_in) {
        if (labels.size() > 1) {
          throw_config("GroupOverlap", "participant '" + m + "' carries " +
                                           std::to_string(labels.size()) +
                                           " of the requested labels; by_role groups must be disjoint");
        }
      }
      break;
    }
    case GroupScheme::Kind::before_after: {
      out.scheme = "before_after";
      std::set<std::string> members;
      for (const auto& [id, p] : corpus.participants()) {
        if (p.promoted_at(scheme.role)) members.insert(id);
      }
      TimeWindow before{scheme.role, TimeWindowFilter::Side::before, scheme.buffer_days};
      TimeWindow after{scheme.role, TimeWindowFilter::Side::after, scheme.buffer_days};
      out.groups.push_back(Group{"before", members, before});
      out.groups.push_back(Group{"after", std::move(members), after});
      break;
    }
    case GroupScheme::Kind::favorable_unfavorable: {
      out.scheme = "favorable_unfavorable";
      if (corpus.cases().empty()) {
        throw_config("InsufficientMetadata", "favorable_unfavorable needs case records");
      }
      PairGroup fav{"favorable", {}};
      PairGroup unfav{"unfavorable", {}};
      auto suffix = [&](const std::string& id, const std::string& case_id) {
        return corpus.per_case_identity() ? id + "@" + case_id : id;
      };
      for (const auto& [case_id, rec] : corpus.cases()) {
        if (rec.justice_votes.empty() || rec.lawyer_sides.empty()) {
          throw_config("InsufficientMetadata",
                       "case '" + case_id + "' lacks votes or lawyer sides");
        }
        for (const auto& [lawyer, side] : rec.lawyer_sides) {
          for (const auto& [justice, vote] : rec.justice_votes) {
            PairEdge e{suffix(lawyer, case_id), suffix(justice, case_id), case_id};
            (vote == side ? fav : unfav).edges.push_back(std::move(e));
          }
        }
      }
      out.pair_groups.push_back(std::move(fav));
      out.pair_groups.push_back(std::move(unfav));
      break;
    }
    case GroupScheme::Kind::same_diff_vote: {
      out.scheme = "same_diff_vote";
      // stance contexts -> voters
      std::map<std::string, std::vector<const Participant*>> by_context;
      for (const auto& [id, p] : corpus.participants()) {
        for (const auto& [ctx, side] : p.stances) by_context[ctx].push_back(&p);
      }
      if (by_context.empty()) {
        throw_config("InsufficientMetadata", "same_diff_vote needs participant stances");
      }
      PairGroup same{"same_vote", {}};
      PairGroup diff{"diff_vote", {}};
      for (const auto& [ctx, voters] : by_context) {
        for (std::size_t i = 0; i < voters.size(); ++i) {
          for (std::size_t j = i + 1; j < voters.size(); ++j) {
            PairEdge e{voters[i]->id, voters[j]->id, ctx};
            bool same_side = voters[i]->stances.at(ctx) == voters[j]->stances.at(ctx);
            (same_side ? same : diff).edges.push_back(std::move(e));
          }
        }
      }
      out.pair_groups.push_back(std::move(same));
      out.pair_groups.push_back(std::move(diff));
      break;
    }
    case GroupScheme::Kind::volume_tertiles: {
      out.scheme = "volume_tertiles";
      std::vector<std::pair<std::size_t, std::string>> counts;
      for (const auto& [id, n] : corpus.reply_counts()) counts.emplace_back(n, id);
      if (counts.size() < 3) {
        throw_config("InsufficientMetadata", "volume_tertiles needs at least 3 repliers");
      }
      std::sort(counts.begin(), counts.end());
      std::size_t third = counts.size() / 3;
      Group bottom{"bottom", {}, std::nullopt};
      Group top{"top", {}, std::nullopt};
      for (std::size_t i = 0; i < third; ++i) bottom.members.insert(counts[i].second);
      for (std::size_t i = counts.size() - third; i < counts.size(); ++i) {
        top.members.insert(counts[i].second);
      }
      out.groups.push_back(std::move(top));
      out.groups.push_back(std::move(bottom));
      break;
    }
    case GroupScheme::Kind::by_attr: {
      out.scheme = "by_attr:" + scheme.attr_key;
      std::map<std::string, Group> by_value;
      for (const auto& [id, p] : corpus.participants()) {
        auto it = p.attrs.find(scheme.attr_key);
        if (it == p.attrs.end()) continue;
        Group& g = by_value[it->second];
        g.label = it->second;
        g.members.insert(id);
      }
      if (by_value.empty()) {
        throw_config("InsufficientMetadata",
                     "no participant has attribute '" + scheme.attr_key + "'");
      }
      for (auto& [v, g] : by_value) out.groups.push_back(std::move(g));
      break;
    }
  }
  return out;
}

}  // namespace coordlab
