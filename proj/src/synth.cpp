#include "coordlab/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "coordlab/error.h"

namespace coordlab {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t base, const std::string& tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix64(base ^ h);
}

bool chance(std::mt19937_64& rng, double p) {
  return (rng() >> 11) * 0x1.0p-53 < p;
}

std::array<double, kNumMarkers> rates_from_json(const json& j, const char* field,
                                                double fallback) {
  std::array<double, kNumMarkers> out;
  out.fill(fallback);
  auto it = j.find(field);
  if (it == j.end()) return out;
  if (it->is_number()) {
    out.fill(it->get<double>());
    return out;
  }
  if (it->is_object()) {
    for (auto& [k, v] : it->items()) {
      auto m = marker_from_name(k);
      if (!m || !v.is_number()) {
        throw_config("InvalidSpec", std::string(field) + " keys must be marker names");
      }
      out[static_cast<int>(*m)] = v.get<double>();
    }
    return out;
  }
  throw_config("InvalidSpec", std::string(field) + " must be a number or per-marker object");
}

json rates_to_json(const std::array<double, kNumMarkers>& r) {
  bool uniform = std::all_of(r.begin(), r.end(), [&](double v) { return v == r[0]; });
  if (uniform) return r[0];
  json o = json::object();
  for (int i = 0; i < kNumMarkers; ++i) o[marker_name(i)] = r[i];
  return o;
}

std::string member_id(const SynthGroup& g, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%04d", index);
  return g.name + buf;
}

}  // namespace

GenSpec GenSpec::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw_config("InvalidSpec", "generator spec is not a JSON object");
  }
  GenSpec spec;
  spec.seed = j.value("seed", 0ULL);
  spec.domain = j.value("domain", std::string("synth"));
  if (auto it = j.find("time_range"); it != j.end()) {
    if (!it->is_array() || it->size() != 2) {
      throw_config("InvalidSpec", "time_range must be [start, end]");
    }
    spec.time_start = (*it)[0].get<std::int64_t>();
    spec.time_end = (*it)[1].get<std::int64_t>();
  }
  if (auto it = j.find("base_vocab"); it != j.end()) {
    spec.base_vocab_prefix = it->value("prefix", std::string("w"));
    spec.base_vocab_size = it->value("size", 100);
  }
  spec.fillers_per_utterance = j.value("fillers_per_utterance", 8);
  for (const json& g : j.value("groups", json::array())) {
    SynthGroup sg;
    sg.name = g.value("name", std::string());
    sg.size = g.value("size", 1);
    for (const json& l : g.value("labels", json::array())) {
      sg.labels.push_back(l.get<std::string>());
    }
    sg.baseline_p = rates_from_json(g, "p", 0.2);
    sg.delta = rates_from_json(g, "delta", 0.0);
    sg.exhibit_q = rates_from_json(g, "q", 0.5);
    if (auto v = g.find("vocab"); v != g.end()) {
      sg.vocab_prefix = v->value("prefix", std::string());
      sg.vocab_size = v->value("size", 0);
    }
    if (auto e = g.find("event"); e != g.end()) {
      SynthGroup::Event ev;
      ev.role = e->value("role", std::string("admin"));
      ev.at = e->value("at", static_cast<std::int64_t>(0));
      ev.delta_after = rates_from_json(*e, "delta_after", 0.0);
      sg.event = std::move(ev);
    }
    spec.groups.push_back(std::move(sg));
  }
  for (const json& l : j.value("lanes", json::array())) {
    SynthLane lane;
    lane.speakers = l.value("speakers", std::string());
    lane.targets = l.value("targets", std::string());
    lane.exchanges_per_speaker = l.value("exchanges_per_speaker", 1);
    spec.lanes.push_back(std::move(lane));
  }
  for (const json& l : j.value("pair_lanes", json::array())) {
    SynthPairLane lane;
    lane.high = l.value("high", std::string());
    lane.low = l.value("low", std::string());
    lane.pairs = l.value("pairs", 1);
    lane.exchanges_each_way = l.value("exchanges_each_way", 1);
    spec.pair_lanes.push_back(std::move(lane));
  }
  spec.validate();
  return spec;
}

GenSpec GenSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_config("InvalidSpec", "cannot open generator spec: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string GenSpec::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["domain"] = domain;
  j["time_range"] = {time_start, time_end};
  j["base_vocab"] = {{"prefix", base_vocab_prefix}, {"size", base_vocab_size}};
  j["fillers_per_utterance"] = fillers_per_utterance;
  j["groups"] = json::array();
  for (const auto& g : groups) {
    json o;
    o["name"] = g.name;
    o["size"] = g.size;
    o["labels"] = g.labels;
    o["p"] = rates_to_json(g.baseline_p);
    o["delta"] = rates_to_json(g.delta);
    o["q"] = rates_to_json(g.exhibit_q);
    if (g.vocab_size > 0) o["vocab"] = {{"prefix", g.vocab_prefix}, {"size", g.vocab_size}};
    if (g.event) {
      o["event"] = {{"role", g.event->role},
                    {"at", g.event->at},
                    {"delta_after", rates_to_json(g.event->delta_after)}};
    }
    j["groups"].push_back(std::move(o));
  }
  j["lanes"] = json::array();
  for (const auto& l : lanes) {
    j["lanes"].push_back({{"speakers", l.speakers},
                          {"targets", l.targets},
                          {"exchanges_per_speaker", l.exchanges_per_speaker}});
  }
  j["pair_lanes"] = json::array();
  for (const auto& l : pair_lanes) {
    j["pair_lanes"].push_back({{"high", l.high},
                               {"low", l.low},
                               {"pairs", l.pairs},
                               {"exchanges_each_way", l.exchanges_each_way}});
  }
  return j.dump(2) + "\n";
}

const SynthGroup& GenSpec::group(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.name == name) return g;
  }
  throw_config("InvalidSpec", "generator spec references unknown group '" + name + "'");
}

void GenSpec::validate() const {
  if (time_end <= time_start) throw_config("InvalidSpec", "time_range must satisfy start < end");
  if (fillers_per_utterance < 1) throw_config("InvalidSpec", "fillers_per_utterance must be >= 1");
  if (base_vocab_size < 1) throw_config("InvalidSpec", "base_vocab size must be >= 1");
  if (groups.empty()) throw_config("InvalidSpec", "generator spec needs at least one group");
  for (const auto& g : groups) {
    if (g.name.empty()) throw_config("InvalidSpec", "every group needs a name");
    if (g.size < 1) throw_config("InvalidSpec", "group '" + g.name + "' needs size >= 1");
    auto check_rates = [&](const std::array<double, kNumMarkers>& p,
                           const std::array<double, kNumMarkers>& d) {
      for (int m = 0; m < kNumMarkers; ++m) {
        if (p[m] < 0.0 || p[m] > 1.0) {
          throw_config("InvalidSpec", "group '" + g.name + "': p must lie in [0,1]");
        }
        double r = p[m] + d[m];
        if (r < 0.0 || r > 1.0) {
          throw_config("InvalidSpec", "group '" + g.name + "': p+delta must lie in [0,1]");
        }
      }
    };
    check_rates(g.baseline_p, g.delta);
    if (g.event) check_rates(g.baseline_p, g.event->delta_after);
    for (int m = 0; m < kNumMarkers; ++m) {
      if (g.exhibit_q[m] <= 0.0 || g.exhibit_q[m] >= 1.0) {
        throw_config("InvalidSpec", "group '" + g.name + "': q must lie in (0,1)");
      }
    }
  }
  for (const auto& l : lanes) {
    if (l.exchanges_per_speaker < 1) throw_config("InvalidSpec", "lane exchanges must be >= 1");
    group(l.speakers);
    group(l.targets);
  }
  for (const auto& l : pair_lanes) {
    if (l.exchanges_each_way < 1) throw_config("InvalidSpec", "pair lane exchanges must be >= 1");
    const SynthGroup& h = group(l.high);
    const SynthGroup& lo = group(l.low);
    if (l.pairs < 1 || l.pairs > std::min(h.size, lo.size)) {
      throw_config("InvalidSpec", "pair lane pairs must lie in [1, min(group sizes)]");
    }
  }
}

namespace {

class Generator {
public:
  Generator(const GenSpec& spec, const Lexicon& lexicon) : spec_(spec), lexicon_(lexicon) {
    // Only lexemes unique to one category get inserted, so an utterance
    // exhibits exactly the categories the model drew.
    std::map<std::string, int> category_count;
    for (int m = 0; m < kNumMarkers; ++m) {
      for (const auto& lex : lexicon.category(m).lexemes()) ++category_count[lex];
    }
    for (int m = 0; m < kNumMarkers; ++m) {
      for (const auto& lex : lexicon.category(m).lexemes()) {
        if (category_count[lex] == 1) safe_lexemes_[m].push_back(lex);
      }
      if (safe_lexemes_[m].empty()) {
        throw_config("InvalidSpec", "lexicon has no lexeme unique to category '" +
                                        marker_name(m) + "'");
      }
    }
  }

  SynthOutput run() {
    for (const auto& g : spec_.groups) {
      for (int i = 0; i < g.size; ++i) emit_participant(g, member_id(g, i));
    }
    for (std::size_t li = 0; li < spec_.lanes.size(); ++li) {
      const SynthLane& lane = spec_.lanes[li];
      const SynthGroup& speakers = spec_.group(lane.speakers);
      const SynthGroup& targets = spec_.group(lane.targets);
      for (int k = 0; k < speakers.size; ++k) {
        std::mt19937_64 rng(stream_seed(
            spec_.seed, "lane:" + std::to_string(li) + ":" + member_id(speakers, k)));
        for (int j = 0; j < lane.exchanges_per_speaker; ++j) {
          int t_idx = (k + j) % targets.size;
          emit_exchange(rng, targets, member_id(targets, t_idx), speakers,
                        member_id(speakers, k), exchange_time(j, lane.exchanges_per_speaker));
        }
      }
    }
    for (std::size_t li = 0; li < spec_.pair_lanes.size(); ++li) {
      const SynthPairLane& lane = spec_.pair_lanes[li];
      const SynthGroup& high = spec_.group(lane.high);
      const SynthGroup& low = spec_.group(lane.low);
      for (int p = 0; p < lane.pairs; ++p) {
        std::string h_id = member_id(high, p);
        std::string l_id = member_id(low, p);
        std::mt19937_64 rng(
            stream_seed(spec_.seed, "pair:" + std::to_string(li) + ":" + h_id + ":" + l_id));
        for (int j = 0; j < lane.exchanges_each_way; ++j) {
          std::int64_t ts = exchange_time(j, lane.exchanges_each_way);
          // low replies to high, then high replies to low
          emit_exchange(rng, high, h_id, low, l_id, ts);
          emit_exchange(rng, low, l_id, high, h_id, ts + 60);
        }
      }
    }
    return {utterances_.str(), participants_.str()};
  }

private:
  std::int64_t exchange_time(int j, int total) const {
    double frac = (j + 0.5) / total;
    return spec_.time_start +
           static_cast<std::int64_t>(frac * static_cast<double>(spec_.time_end - spec_.time_start));
  }

  void emit_participant(const SynthGroup& g, const std::string& id) {
    json j;
    j["id"] = id;
    j["labels"] = g.labels;
    json events = json::array();
    if (g.event) {
      events.push_back({{"role", g.event->role}, {"at", g.event->at}, {"outcome", "promoted"}});
    }
    j["status_events"] = std::move(events);
    j["stances"] = json::object();
    j["attrs"] = {{"group", g.name}};
    participants_ << j.dump() << "\n";
  }

  std::string utterance_text(std::mt19937_64& rng, const SynthGroup& author,
                             const std::array<bool, kNumMarkers>& exhibit) {
    std::vector<std::string> words;
    words.reserve(spec_.fillers_per_utterance + kNumMarkers);
    int base = spec_.base_vocab_size;
    int extra = author.vocab_size;
    for (int i = 0; i < spec_.fillers_per_utterance; ++i) {
      int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(base + extra));
      if (pick < base) {
        words.push_back(spec_.base_vocab_prefix + std::to_string(pick));
      } else {
        words.push_back(author.vocab_prefix + std::to_string(pick - base));
      }
    }
    for (int m = 0; m < kNumMarkers; ++m) {
      if (!exhibit[m]) continue;
      const auto& pool = safe_lexemes_[m];
      words.push_back(pool[rng() % pool.size()]);
    }
    // deterministic placement of the marker words
    for (std::size_t i = words.size(); i > 1; --i) {
      std::swap(words[i - 1], words[rng() % i]);
    }
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) text.push_back(' ');
      text += words[i];
    }
    return text;
  }

  const std::array<double, kNumMarkers>& delta_at(const SynthGroup& g, std::int64_t ts) const {
    if (g.event && ts >= g.event->at) return g.event->delta_after;
    return g.delta;
  }

  void emit_exchange(std::mt19937_64& rng, const SynthGroup& target_group,
                     const std::string& target_id, const SynthGroup& speaker_group,
                     const std::string& speaker_id, std::int64_t ts) {
    std::array<bool, kNumMarkers> t_exhibit{}, r_exhibit{};
    const auto& delta = delta_at(speaker_group, ts + 30);
    for (int m = 0; m < kNumMarkers; ++m) {
      t_exhibit[m] = chance(rng, target_group.exhibit_q[m]);
      double p = speaker_group.baseline_p[m] + (t_exhibit[m] ? delta[m] : 0.0);
      r_exhibit[m] = chance(rng, p);
    }
    std::string conv = "c" + std::to_string(conversation_counter_++);
    std::string target_utt_id = "u" + std::to_string(utterance_counter_++);
    std::string reply_utt_id = "u" + std::to_string(utterance_counter_++);
    json t;
    t["id"] = target_utt_id;
    t["conv_id"] = conv;
    t["speaker"] = target_id;
    t["reply_to"] = nullptr;
    t["ts"] = ts;
    t["text"] = utterance_text(rng, target_group, t_exhibit);
    utterances_ << t.dump() << "\n";
    json r;
    r["id"] = reply_utt_id;
    r["conv_id"] = conv;
    r["speaker"] = speaker_id;
    r["reply_to"] = target_utt_id;
    r["ts"] = ts + 30;
    r["text"] = utterance_text(rng, speaker_group, r_exhibit);
    utterances_ << r.dump() << "\n";
  }

  const GenSpec& spec_;
  const Lexicon& lexicon_;
  std::array<std::vector<std::string>, kNumMarkers> safe_lexemes_;
  std::ostringstream utterances_;
  std::ostringstream participants_;
  std::size_t conversation_counter_ = 0;
  std::size_t utterance_counter_ = 0;
};

}  // namespace

SynthOutput generate(const GenSpec& spec, const Lexicon& lexicon) {
  spec.validate();
  Generator gen(spec, lexicon);
  return gen.run();
}

Corpus load_generated(const SynthOutput& out, const Lexicon& lexicon, const LoadOptions& options) {
  std::istringstream utt(out.utterances_jsonl);
  std::istringstream parts(out.participants_jsonl);
  return Corpus::load(utt, &parts, nullptr, lexicon, options);
}

double expected_coordination(const GenSpec& spec, const std::string& speaker_group,
                             const std::string& target_group, Marker m, bool after_event) {
  const SynthGroup& s = spec.group(speaker_group);
  const SynthGroup& t = spec.group(target_group);
  int i = static_cast<int>(m);
  double delta = s.delta[i];
  if (after_event) {
    if (!s.event) throw_config("InvalidSpec", "group '" + speaker_group + "' has no event");
    delta = s.event->delta_after[i];
  }
  return delta * (1.0 - t.exhibit_q[i]);
}

std::string oracle_json_text(const GenSpec& spec) {
  json out;
  out["domain"] = spec.domain;
  auto expected_for = [&](const std::string& sg, const std::string& tg) {
    json e = json::object();
    for (int m = 0; m < kNumMarkers; ++m) {
      e[marker_name(m)] = expected_coordination(spec, sg, tg, static_cast<Marker>(m));
    }
    return e;
  };
  json lanes = json::array();
  for (const auto& l : spec.lanes) {
    json o;
    o["speakers"] = l.speakers;
    o["targets"] = l.targets;
    o["expected_coordination"] = expected_for(l.speakers, l.targets);
    if (spec.group(l.speakers).event) {
      json e = json::object();
      for (int m = 0; m < kNumMarkers; ++m) {
        e[marker_name(m)] =
            expected_coordination(spec, l.speakers, l.targets, static_cast<Marker>(m), true);
      }
      o["expected_coordination_after_event"] = std::move(e);
    }
    lanes.push_back(std::move(o));
  }
  out["lanes"] = std::move(lanes);
  json pair_lanes = json::array();
  for (const auto& l : spec.pair_lanes) {
    json o;
    o["high"] = l.high;
    o["low"] = l.low;
    o["expected_coordination_low_to_high"] = expected_for(l.low, l.high);
    o["expected_coordination_high_to_low"] = expected_for(l.high, l.low);
    pair_lanes.push_back(std::move(o));
  }
  out["pair_lanes"] = std::move(pair_lanes);
  return out.dump(2) + "\n";
}

}  // namespace coordlab
