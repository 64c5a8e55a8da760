#include "coordlab/coordination.h"

#include <algorithm>

#include "coordlab/error.h"

namespace coordlab {

int SpeakerProfile::defined_markers() const {
  int n = 0;
  for (const auto& mc : per_marker) n += mc.defined ? 1 : 0;
  return n;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v(marker_names().begin(), marker_names().end());
    v.insert(v.end(), {"agg1", "agg2", "agg3"});
    return v;
  }();
  return names;
}

MarkerCoordination coord_marker(const ExchangeSet& exchanges, Marker m,
                                const CoordinationConfig& config) {
  MarkerCoordination out;
  out.marker = m;
  int bit = static_cast<int>(m);
  for (std::size_t i = 0; i < exchanges.size(); ++i) {
    Exchange e = exchanges.at(i);
    bool t = e.target->exhibits(bit);
    bool r = e.reply->exhibits(bit);
    ++out.n_total;
    if (t) ++out.n_target_exhibits;
    if (r) ++out.n_reply_exhibits;
    if (t && r) ++out.n_both;
  }
  out.defined = out.n_target_exhibits >= config.min_exhibits &&
                out.n_total >= config.min_exchanges;
  if (out.defined) {
    out.value = static_cast<double>(out.n_both) / static_cast<double>(out.n_target_exhibits) -
                static_cast<double>(out.n_reply_exhibits) / static_cast<double>(out.n_total);
  }
  return out;
}

std::array<MarkerCoordination, kNumMarkers> coord_markers(const ExchangeSet& exchanges,
                                                          const CoordinationConfig& config) {
  std::array<MarkerCoordination, kNumMarkers> out;
  for (int i = 0; i < kNumMarkers; ++i) {
    out[i] = coord_marker(exchanges, static_cast<Marker>(i), config);
  }
  return out;
}

namespace {

// Exchange indices per reply speaker, speakers ascending.
std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> split_by_speaker(
    const ExchangeSet& exchanges) {
  std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> by_speaker;
  for (std::size_t i = 0; i < exchanges.size(); ++i) {
    by_speaker[exchanges.at(i).reply->speaker_id].push_back(exchanges.indices()[i]);
  }
  return by_speaker;
}

}  // namespace

GroupMeanResult coord_group(const ExchangeSet& exchanges, Marker m,
                            const CoordinationConfig& config) {
  GroupMeanResult out;
  double sum = 0.0;
  for (auto& [speaker, idx] : split_by_speaker(exchanges)) {
    ExchangeSet own(exchanges.corpus(), std::move(idx), "speaker " + speaker);
    MarkerCoordination mc = coord_marker(own, m, config);
    if (mc.defined) {
      sum += mc.value;
      ++out.population;
      out.per_speaker.emplace_back(speaker, mc.value);
    } else {
      out.per_speaker.emplace_back(speaker, std::nullopt);
    }
  }
  if (out.population == 0) {
    throw_config("EmptyGroup", "no speaker has a defined coordination value for marker '" +
                                   marker_name(m) + "'");
  }
  out.mean = sum / out.population;
  return out;
}

std::optional<double> aggregate_speaker(
    const std::array<MarkerCoordination, kNumMarkers>& per_marker, AggScheme scheme,
    const std::array<std::optional<double>, kNumMarkers>& group_means) {
  int defined = 0;
  for (const auto& mc : per_marker) defined += mc.defined ? 1 : 0;
  switch (scheme) {
    case AggScheme::one: {
      if (defined != kNumMarkers) return std::nullopt;
      double sum = 0.0;
      for (const auto& mc : per_marker) sum += mc.value;
      return sum / kNumMarkers;
    }
    case AggScheme::two: {
      if (defined == 0) return std::nullopt;
      double sum = 0.0;
      for (int i = 0; i < kNumMarkers; ++i) {
        if (per_marker[i].defined) {
          sum += per_marker[i].value;
        } else if (group_means[i]) {
          sum += *group_means[i];
        } else {
          throw_config("MissingGroupMean",
                       "no group mean available to smooth marker '" + marker_name(i) + "'");
        }
      }
      return sum / kNumMarkers;
    }
    case AggScheme::three: {
      if (defined == 0) return std::nullopt;
      double sum = 0.0;
      for (const auto& mc : per_marker) {
        if (mc.defined) sum += mc.value;
      }
      return sum / defined;
    }
  }
  return std::nullopt;
}

GroupProfile coordination_profile(const Corpus& corpus, const ProfileRequest& request) {
  GroupProfile out;
  out.speaker_group = request.speakers.label;
  out.target_group = request.targets.label;

  auto in_speakers = [&](const std::string& id) { return request.speakers.members.count(id) > 0; };
  auto in_targets = [&](const std::string& id) { return request.targets.members.count(id) > 0; };
  ExchangeSet base = derive_exchanges(corpus, in_speakers, in_targets);

  // Group time windows ride along as filters anchored at the group's own side.
  FilterSpec spec = request.filters;
  ExchangeSet filtered = base;
  auto apply_window = [&](const TimeWindow& w, TimeWindowFilter::Anchor anchor) {
    FilterSpec ws;
    ws.time_window = TimeWindowFilter{w.role, w.side, w.buffer_days, anchor};
    filtered = filter_exchanges(filtered, ws);
  };
  if (request.speakers.window) {
    apply_window(*request.speakers.window, TimeWindowFilter::Anchor::speaker);
  }
  if (request.targets.window) {
    apply_window(*request.targets.window, TimeWindowFilter::Anchor::target);
  }
  if (!spec.empty()) filtered = filter_exchanges(filtered, spec);

  if (request.pairs) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> idx;
    for (std::size_t i = 0; i < filtered.size(); ++i) {
      Exchange e = filtered.at(i);
      if (request.pairs->matches(e.reply->speaker_id, e.target->speaker_id,
                                 e.reply->conversation_id)) {
        idx.push_back(filtered.indices()[i]);
      }
    }
    filtered = ExchangeSet(&corpus, std::move(idx),
                           filtered.description() + "; pairs " + request.pairs->label);
  }

  out.filters = filtered.description();
  out.n_exchanges = static_cast<std::int64_t>(filtered.size());

  for (auto& [speaker, idx] : split_by_speaker(filtered)) {
    SpeakerProfile sp;
    sp.speaker_id = speaker;
    sp.n_exchanges = static_cast<std::int64_t>(idx.size());
    ExchangeSet own(&corpus, std::move(idx), "speaker " + speaker);
    sp.per_marker = coord_markers(own, request.config);
    out.speakers.push_back(std::move(sp));
  }

  bool any_defined = false;
  for (int m = 0; m < kNumMarkers; ++m) {
    double sum = 0.0;
    int pop = 0;
    for (const auto& sp : out.speakers) {
      if (sp.per_marker[m].defined) {
        sum += sp.per_marker[m].value;
        ++pop;
      }
    }
    out.marker_populations[m] = pop;
    if (pop > 0) {
      out.marker_means[m] = sum / pop;
      any_defined = true;
    }
  }
  if (!any_defined) {
    throw_config("EmptyGroup", "no coordination value is defined for speakers '" +
                                   out.speaker_group + "' toward '" + out.target_group + "'");
  }

  double sums[3] = {0, 0, 0};
  int pops[3] = {0, 0, 0};
  for (auto& sp : out.speakers) {
    sp.agg1 = aggregate_speaker(sp.per_marker, AggScheme::one, out.marker_means);
    // A marker nobody defines leaves agg2 unset for speakers that need it.
    try {
      sp.agg2 = aggregate_speaker(sp.per_marker, AggScheme::two, out.marker_means);
    } catch (const Error& e) {
      sp.agg2 = std::nullopt;
    }
    sp.agg3 = aggregate_speaker(sp.per_marker, AggScheme::three, out.marker_means);
    const std::optional<double>* aggs[3] = {&sp.agg1, &sp.agg2, &sp.agg3};
    for (int k = 0; k < 3; ++k) {
      if (*aggs[k]) {
        sums[k] += **aggs[k];
        ++pops[k];
      }
    }
  }
  if (pops[0] > 0) out.agg1_mean = sums[0] / pops[0];
  if (pops[1] > 0) out.agg2_mean = sums[1] / pops[1];
  if (pops[2] > 0) out.agg3_mean = sums[2] / pops[2];
  out.agg1_population = pops[0];
  out.agg2_population = pops[1];
  out.agg3_population = pops[2];
  return out;
}

std::vector<double> GroupProfile::samples(const std::string& metric) const {
  std::vector<double> out;
  if (auto m = marker_from_name(metric)) {
    int i = static_cast<int>(*m);
    for (const auto& sp : speakers) {
      if (sp.per_marker[i].defined) out.push_back(sp.per_marker[i].value);
    }
    return out;
  }
  for (const auto& sp : speakers) {
    const std::optional<double>* v = nullptr;
    if (metric == "agg1") v = &sp.agg1;
    else if (metric == "agg2") v = &sp.agg2;
    else if (metric == "agg3") v = &sp.agg3;
    else throw_config("UnknownMetric", "unknown metric '" + metric + "'");
    if (*v) out.push_back(**v);
  }
  return out;
}

std::optional<double> GroupProfile::metric_mean(const std::string& metric) const {
  if (auto m = marker_from_name(metric)) return marker_means[static_cast<int>(*m)];
  if (metric == "agg1") return agg1_mean;
  if (metric == "agg2") return agg2_mean;
  if (metric == "agg3") return agg3_mean;
  throw_config("UnknownMetric", "unknown metric '" + metric + "'");
}

int GroupProfile::metric_population(const std::string& metric) const {
  if (auto m = marker_from_name(metric)) return marker_populations[static_cast<int>(*m)];
  if (metric == "agg1") return agg1_population;
  if (metric == "agg2") return agg2_population;
  if (metric == "agg3") return agg3_population;
  throw_config("UnknownMetric", "unknown metric '" + metric + "'");
}

}  // namespace coordlab
