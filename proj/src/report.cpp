#include "coordlab/report.h"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace coordlab {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::string opt_str(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string stars_text(int stars) { return std::string(stars, '*'); }

json test_json(const TestResult& t) {
  json j;
  j["t"] = t.t_stat;
  j["df"] = t.df;
  j["p"] = t.p_value;
  j["p_two_tailed"] = t.p_two_tailed;
  j["tails"] = t.tails == Tails::one ? "one" : "two";
  if (t.direction) j["direction"] = *t.direction == Direction::greater ? "greater" : "less";
  j["stars"] = t.stars;
  return j;
}

}  // namespace

std::string profile_csv(const GroupProfile& profile) {
  std::ostringstream os;
  os << "# scale: natural units\n";
  os << "speaker_group,target_group,metric,mean,population,n_exchanges\n";
  for (const std::string& metric : metric_names()) {
    os << profile.speaker_group << ',' << profile.target_group << ',' << metric << ','
       << opt_str(profile.metric_mean(metric)) << ',' << profile.metric_population(metric) << ','
       << profile.n_exchanges << "\n";
  }
  return os.str();
}

std::string profile_json(const GroupProfile& profile) {
  json j;
  j["speaker_group"] = profile.speaker_group;
  j["target_group"] = profile.target_group;
  j["n_exchanges"] = profile.n_exchanges;
  j["filters"] = profile.filters;
  j["scale"] = "natural";
  json markers = json::object();
  for (int m = 0; m < kNumMarkers; ++m) {
    markers[marker_name(m)] = {{"mean", opt_json(profile.marker_means[m])},
                               {"population", profile.marker_populations[m]}};
  }
  j["markers"] = std::move(markers);
  j["aggregates"] = {
      {"agg1", {{"mean", opt_json(profile.agg1_mean)}, {"population", profile.agg1_population}}},
      {"agg2", {{"mean", opt_json(profile.agg2_mean)}, {"population", profile.agg2_population}}},
      {"agg3", {{"mean", opt_json(profile.agg3_mean)}, {"population", profile.agg3_population}}}};
  json speakers = json::array();
  for (const auto& sp : profile.speakers) {
    json s;
    s["speaker"] = sp.speaker_id;
    s["n_exchanges"] = sp.n_exchanges;
    json per_marker = json::object();
    for (int m = 0; m < kNumMarkers; ++m) {
      const MarkerCoordination& mc = sp.per_marker[m];
      per_marker[marker_name(m)] = {{"defined", mc.defined},
                                    {"value", mc.defined ? json(mc.value) : json(nullptr)},
                                    {"n_total", mc.n_total},
                                    {"n_target_exhibits", mc.n_target_exhibits},
                                    {"n_both", mc.n_both},
                                    {"n_reply_exhibits", mc.n_reply_exhibits}};
    }
    s["markers"] = std::move(per_marker);
    s["agg1"] = opt_json(sp.agg1);
    s["agg2"] = opt_json(sp.agg2);
    s["agg3"] = opt_json(sp.agg3);
    speakers.push_back(std::move(s));
  }
  j["speakers"] = std::move(speakers);
  return j.dump(2) + "\n";
}

std::string comparison_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "# scale: natural units\n";
  os << "group_a,group_b,metric,mean_a,mean_b,t,p,stars,boot_std_a,boot_std_b\n";
  for (const auto& e : report.entries) {
    os << report.group_a << ',' << report.group_b << ',' << e.metric << ',' << opt_str(e.mean_a)
       << ',' << opt_str(e.mean_b) << ',';
    if (e.testable) {
      os << fmt_double(e.test->t_stat) << ',' << fmt_double(e.test->p_value) << ','
         << e.test->stars;
    } else {
      os << ",,";
    }
    os << ',' << opt_str(e.boot_std_a) << ',' << opt_str(e.boot_std_b) << "\n";
  }
  return os.str();
}

std::string comparison_json(const ComparisonReport& report) {
  json j;
  j["group_a"] = report.group_a;
  j["group_b"] = report.group_b;
  if (report.direction) {
    j["direction"] = *report.direction == Direction::greater ? "a_greater" : "a_less";
  }
  json entries = json::array();
  for (const auto& e : report.entries) {
    json o;
    o["metric"] = e.metric;
    o["mean_a"] = opt_json(e.mean_a);
    o["mean_b"] = opt_json(e.mean_b);
    o["n_a"] = e.n_a;
    o["n_b"] = e.n_b;
    o["testable"] = e.testable;
    if (!e.testable) o["note"] = e.note;
    if (e.testable) o["test"] = test_json(*e.test);
    o["boot_std_a"] = opt_json(e.boot_std_a);
    o["boot_std_b"] = opt_json(e.boot_std_b);
    entries.push_back(std::move(o));
  }
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

std::string comparison_plot_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "metric," << report.group_a << ',' << report.group_b << ",boot_std_a,boot_std_b,stars\n";
  for (const auto& e : report.entries) {
    os << e.metric << ',' << opt_str(e.mean_a) << ',' << opt_str(e.mean_b) << ','
       << opt_str(e.boot_std_a) << ',' << opt_str(e.boot_std_b) << ','
       << (e.testable ? stars_text(e.test->stars) : "") << "\n";
  }
  return os.str();
}

std::string comparison_svg(const ComparisonReport& report, bool percent) {
  // Grouped bars per metric, bootstrap-std whiskers, stars under the x labels.
  const double bar_w = 18, gap = 14, group_w = 2 * bar_w + gap;
  const double left = 60, top = 30, plot_h = 220, bottom = 70;
  const int n = static_cast<int>(report.entries.size());
  const double width = left + n * group_w + 40;
  const double height = top + plot_h + bottom;
  double scale_factor = percent ? 100.0 : 1.0;

  double max_abs = 1e-9;
  for (const auto& e : report.entries) {
    for (const auto& v : {e.mean_a, e.mean_b}) {
      if (v) max_abs = std::max(max_abs, std::fabs(*v) * scale_factor);
    }
    for (const auto& s : {e.boot_std_a, e.boot_std_b}) {
      if (s) max_abs = std::max(max_abs, 1.5 * *s * scale_factor);
    }
  }
  double y_zero = top + plot_h / 2.0;
  double unit = (plot_h / 2.0 - 10) / max_abs;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_double(width)
     << "\" height=\"" << fmt_double(height) << "\">\n";
  os << "<style>text{font-family:sans-serif;font-size:10px}</style>\n";
  os << "<line x1=\"" << fmt_double(left - 10) << "\" y1=\"" << fmt_double(y_zero) << "\" x2=\""
     << fmt_double(width - 20) << "\" y2=\"" << fmt_double(y_zero)
     << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  const char* colors[2] = {"#4878a8", "#d08060"};
  for (int i = 0; i < n; ++i) {
    const auto& e = report.entries[i];
    const std::optional<double> means[2] = {e.mean_a, e.mean_b};
    const std::optional<double> stds[2] = {e.boot_std_a, e.boot_std_b};
    for (int k = 0; k < 2; ++k) {
      if (!means[k]) continue;
      double v = *means[k] * scale_factor;
      double x = left + i * group_w + k * bar_w;
      double h = std::fabs(v) * unit;
      double y = v >= 0 ? y_zero - h : y_zero;
      os << "<rect x=\"" << fmt_double(x) << "\" y=\"" << fmt_double(y) << "\" width=\""
         << fmt_double(bar_w - 2) << "\" height=\"" << fmt_double(h) << "\" fill=\"" << colors[k]
         << "\"/>\n";
      if (stds[k]) {
        double cx = x + (bar_w - 2) / 2.0;
        double s = *stds[k] * scale_factor * unit;
        double tip = v >= 0 ? y_zero - v * unit : y_zero + std::fabs(v) * unit;
        os << "<line x1=\"" << fmt_double(cx) << "\" y1=\"" << fmt_double(tip - s) << "\" x2=\""
           << fmt_double(cx) << "\" y2=\"" << fmt_double(tip + s)
           << "\" stroke=\"#222\" stroke-width=\"1\"/>\n";
      }
    }
    double lx = left + i * group_w + bar_w;
    os << "<text x=\"" << fmt_double(lx) << "\" y=\"" << fmt_double(top + plot_h + 28)
       << "\" text-anchor=\"middle\" transform=\"rotate(30 " << fmt_double(lx) << ' '
       << fmt_double(top + plot_h + 28) << ")\">" << e.metric
       << (e.testable ? stars_text(e.test->stars) : "") << "</text>\n";
  }
  os << "<rect x=\"" << fmt_double(left) << "\" y=\"6\" width=\"10\" height=\"10\" fill=\""
     << colors[0] << "\"/><text x=\"" << fmt_double(left + 14) << "\" y=\"15\">" << report.group_a
     << "</text>\n";
  os << "<rect x=\"" << fmt_double(left + 180) << "\" y=\"6\" width=\"10\" height=\"10\" fill=\""
     << colors[1] << "\"/><text x=\"" << fmt_double(left + 194) << "\" y=\"15\">"
     << report.group_b << "</text>\n";
  os << "<text x=\"8\" y=\"" << fmt_double(y_zero) << "\">0</text>\n";
  os << "</svg>\n";
  return os.str();
}

namespace {

json hypothesis_json(const HypothesisResult& h) {
  json j;
  j["hypothesis"] = h.hypothesis;
  j["high_group"] = h.high_group;
  j["low_group"] = h.low_group;
  j["verdict"] = verdict_name(h.verdict);
  j["verdict_metric"] = h.verdict_metric;
  j["comparison"] = json::parse(comparison_json(h.comparison));
  return j;
}

}  // namespace

std::string hypotheses_json(const HypothesisReport& report) {
  json j;
  j["P_target"] = hypothesis_json(report.p_target);
  j["P_speaker"] = hypothesis_json(report.p_speaker);
  return j.dump(2) + "\n";
}

std::string hypotheses_csv(const HypothesisReport& report) {
  std::ostringstream os;
  os << "# scale: natural units\n";
  os << "hypothesis,metric,mean_a,mean_b,t,p,stars,verdict\n";
  for (const HypothesisResult* h : {&report.p_target, &report.p_speaker}) {
    for (const auto& e : h->comparison.entries) {
      os << h->hypothesis << ',' << e.metric << ',' << opt_str(e.mean_a) << ','
         << opt_str(e.mean_b) << ',';
      if (e.testable) {
        os << fmt_double(e.test->t_stat) << ',' << fmt_double(e.test->p_value) << ','
           << e.test->stars;
      } else {
        os << ",,";
      }
      os << ',' << (e.metric == h->verdict_metric ? verdict_name(h->verdict) : "") << "\n";
    }
  }
  return os.str();
}

std::string timeline_csv(const TimelineSeries& series) {
  std::ostringstream os;
  os << "# scale: natural units; smoothed columns are a centered 3-bucket moving average\n";
  os << "bucket,as_speaker,speaker_population,as_target,target_population,"
     << "as_speaker_sma3,as_target_sma3\n";
  auto sma3 = [&](std::size_t i, bool speaker) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (std::size_t j = (i == 0 ? 0 : i - 1); j <= i + 1 && j < series.buckets.size(); ++j) {
      const auto& v = speaker ? series.buckets[j].as_speaker : series.buckets[j].as_target;
      if (v) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  for (std::size_t i = 0; i < series.buckets.size(); ++i) {
    const auto& b = series.buckets[i];
    os << b.bucket << ',' << opt_str(b.as_speaker) << ',' << b.speaker_population << ','
       << opt_str(b.as_target) << ',' << b.target_population << ',' << opt_str(sma3(i, true))
       << ',' << opt_str(sma3(i, false)) << "\n";
  }
  return os.str();
}

std::string timeline_json(const TimelineSeries& series) {
  json j;
  j["role"] = series.role;
  j["participants_with_event"] = series.participants_with_event;
  j["no_event_excluded"] = series.no_event_excluded;
  json buckets = json::array();
  for (const auto& b : series.buckets) {
    buckets.push_back({{"bucket", b.bucket},
                       {"as_speaker", opt_json(b.as_speaker)},
                       {"speaker_population", b.speaker_population},
                       {"as_target", opt_json(b.as_target)},
                       {"target_population", b.target_population}});
  }
  j["buckets"] = std::move(buckets);
  return j.dump(2) + "\n";
}

std::string prediction_grid_csv(const std::vector<GridCell>& cells) {
  std::ostringstream os;
  os << "train_domain,test_domain,protocol,features,accuracy,n,correct,binom_p,significant\n";
  for (const auto& c : cells) {
    os << c.train_domain << ',' << c.test_domain << ',' << c.protocol << ','
       << feature_kind_name(c.kind) << ',' << fmt_double(c.result.accuracy) << ',' << c.result.n
       << ',' << c.result.correct << ',' << fmt_double(c.result.binom_p) << ','
       << (c.result.binom_p < 0.05 ? "yes" : "no") << "\n";
  }
  return os.str();
}

std::string prediction_grid_json(const std::vector<GridCell>& cells) {
  json arr = json::array();
  for (const auto& c : cells) {
    json o;
    o["train_domain"] = c.train_domain;
    o["test_domain"] = c.test_domain;
    o["protocol"] = c.protocol;
    o["features"] = feature_kind_name(c.kind);
    o["accuracy"] = c.result.accuracy;
    o["n"] = c.result.n;
    o["correct"] = c.result.correct;
    o["binom_p"] = c.result.binom_p;
    o["significant_vs_chance"] = c.result.binom_p < 0.05;
    json folds = json::array();
    for (const auto& f : c.result.folds) {
      folds.push_back({{"fold", f.fold},
                       {"n", f.n_test},
                       {"correct", f.correct},
                       {"accuracy", f.accuracy}});
    }
    o["folds"] = std::move(folds);
    arr.push_back(std::move(o));
  }
  json j;
  j["grid"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string profile_pretty(const GroupProfile& profile, bool percent) {
  std::ostringstream os;
  double scale = percent ? 100.0 : 1.0;
  os << "coordination of '" << profile.speaker_group << "' toward '" << profile.target_group
     << "' (" << profile.n_exchanges << " exchanges"
     << (percent ? ", values x100" : "") << ")\n";
  for (const std::string& metric : metric_names()) {
    auto mean = profile.metric_mean(metric);
    os << "  " << metric;
    for (std::size_t pad = metric.size(); pad < 20; ++pad) os << ' ';
    if (mean) {
      os << fmt_double(*mean * scale) << "  (n=" << profile.metric_population(metric) << ")";
    } else {
      os << "undefined";
    }
    os << "\n";
  }
  return os.str();
}

std::string comparison_pretty(const ComparisonReport& report, bool percent) {
  std::ostringstream os;
  double scale = percent ? 100.0 : 1.0;
  os << "comparison: A='" << report.group_a << "'  B='" << report.group_b << "'"
     << (percent ? " (values x100)" : "") << "\n";
  for (const auto& e : report.entries) {
    os << "  " << e.metric;
    for (std::size_t pad = e.metric.size(); pad < 20; ++pad) os << ' ';
    if (e.mean_a) os << fmt_double(*e.mean_a * scale);
    else os << "undef";
    os << " vs ";
    if (e.mean_b) os << fmt_double(*e.mean_b * scale);
    else os << "undef";
    if (e.testable) {
      os << "  p=" << fmt_double(e.test->p_value) << ' ' << stars_text(e.test->stars);
    } else {
      os << "  [" << e.note << "]";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace coordlab
