#include "coordlab/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "coordlab/coordination.h"
#include "coordlab/corpus.h"
#include "coordlab/error.h"
#include "coordlab/lexicon.h"
#include "coordlab/prediction.h"
#include "coordlab/report.h"
#include "coordlab/stats.h"
#include "coordlab/synth.h"

namespace coordlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string corpus_path;
  std::string participants_path;
  std::string cases_path;
  std::string lexicon_path;  // empty = builtin
  std::string filters_json;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool percent = false;
  bool svg = false;
  bool per_case_identity = false;
  std::string tails = "one";
  std::string test = "student";
  int resamples = 1000;
  int min_exhibits = 1;
  int min_exchanges = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_corpus) {
  auto* corpus = cmd->add_option("--corpus", o.corpus_path, "utterances JSONL");
  if (needs_corpus) corpus->required();
  cmd->add_option("--participants", o.participants_path, "participants JSONL");
  cmd->add_option("--cases", o.cases_path, "case records JSONL");
  cmd->add_option("--lexicon", o.lexicon_path, "marker lexicon TSV (default: built-in)");
  cmd->add_option("--filters", o.filters_json, "exchange filters as JSON");
  cmd->add_option("--seed", o.seed, "RNG seed (fallback: COORDLAB_SEED, then 0)");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_flag("--percent", o.percent, "display values multiplied by 100");
  cmd->add_flag("--svg", o.svg, "also write an SVG chart");
  cmd->add_flag("--per-case-identity", o.per_case_identity,
                "treat each appearance per conversation as a separate entity");
  cmd->add_option("--tails", o.tails, "one|two (directional tests)")
      ->check(CLI::IsMember({"one", "two"}));
  cmd->add_option("--test", o.test, "student|welch")
      ->check(CLI::IsMember({"student", "welch"}));
  cmd->add_option("--resamples", o.resamples, "bootstrap resamples");
  cmd->add_option("--min-exhibits", o.min_exhibits, "definedness threshold (target exhibits)");
  cmd->add_option("--min-exchanges", o.min_exchanges, "definedness threshold (exchanges)");
}

std::uint64_t resolve_seed(const CommonOpts& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("COORDLAB_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

FilterSpec parse_filters(const std::string& text) {
  FilterSpec spec;
  if (text.empty()) return spec;
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw_config("InvalidSpec", "--filters must be a JSON object");
  }
  if (auto it = j.find("max_len_diff"); it != j.end()) {
    if (!it->is_number_integer()) throw_config("InvalidSpec", "max_len_diff must be an integer");
    spec.max_len_diff = it->get<int>();
  }
  if (auto it = j.find("time_window"); it != j.end()) {
    TimeWindowFilter w;
    w.role = it->value("role", std::string("admin"));
    std::string side = it->value("side", std::string("after"));
    if (side != "before" && side != "after") {
      throw_config("InvalidSpec", "time_window side must be before|after");
    }
    w.side = side == "before" ? TimeWindowFilter::Side::before : TimeWindowFilter::Side::after;
    w.buffer_days = it->value("buffer_days", 30);
    std::string anchor = it->value("anchor", std::string("speaker"));
    if (anchor != "speaker" && anchor != "target") {
      throw_config("InvalidSpec", "time_window anchor must be speaker|target");
    }
    w.anchor = anchor == "speaker" ? TimeWindowFilter::Anchor::speaker
                                   : TimeWindowFilter::Anchor::target;
    spec.time_window = w;
  }
  if (auto it = j.find("exclude_ngram_repeats"); it != j.end()) {
    NgramRepeatFilter f;
    f.n = it->value("n", 3);
    if (f.n < 2) throw_config("InvalidSpec", "exclude_ngram_repeats needs n >= 2");
    std::string cat = it->value("category", std::string("conjunctions"));
    auto m = marker_from_name(cat);
    if (!m) throw_config("InvalidSpec", "unknown marker category '" + cat + "'");
    f.category = *m;
    spec.exclude_ngram_repeats = f;
  }
  return spec;
}

json filters_to_json(const FilterSpec& spec) {
  json j = json::object();
  if (spec.max_len_diff) j["max_len_diff"] = *spec.max_len_diff;
  if (spec.time_window) {
    j["time_window"] = {
        {"role", spec.time_window->role},
        {"side", spec.time_window->side == TimeWindowFilter::Side::before ? "before" : "after"},
        {"buffer_days", spec.time_window->buffer_days},
        {"anchor",
         spec.time_window->anchor == TimeWindowFilter::Anchor::speaker ? "speaker" : "target"}};
  }
  if (spec.exclude_ngram_repeats) {
    j["exclude_ngram_repeats"] = {{"n", spec.exclude_ngram_repeats->n},
                                  {"category", marker_name(spec.exclude_ngram_repeats->category)}};
  }
  return j;
}

struct Session {
  Lexicon lexicon;
  std::optional<Corpus> corpus;
  FilterSpec filters;
  std::uint64_t seed = 0;
  CoordinationConfig coord_config;
  StatsConfig stats_config;
};

Session open_session(const CommonOpts& o, bool load_corpus) {
  Session s{o.lexicon_path.empty() ? Lexicon::builtin() : Lexicon::load(o.lexicon_path), {}, {}, 0, {}, {}};
  s.filters = parse_filters(o.filters_json);
  s.seed = resolve_seed(o);
  s.coord_config.min_exhibits = o.min_exhibits;
  s.coord_config.min_exchanges = o.min_exchanges;
  s.stats_config.test = o.test == "welch" ? TTestKind::welch : TTestKind::student;
  s.stats_config.tails = o.tails == "two" ? Tails::two : Tails::one;
  s.stats_config.bootstrap_resamples = o.resamples;
  s.stats_config.seed = s.seed;
  if (load_corpus) {
    LoadOptions opts;
    opts.per_case_identity = o.per_case_identity;
    s.corpus = Corpus::load_files(o.corpus_path, o.participants_path, o.cases_path, s.lexicon,
                                  opts);
  }
  return s;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) throw_config("IoError", "cannot write " + name + " under " + dir);
  out << content;
}

json common_config_json(const std::string& command, const CommonOpts& o, const Session& s) {
  json j;
  j["command"] = command;
  j["corpus"] = o.corpus_path;
  j["participants"] = o.participants_path;
  j["cases"] = o.cases_path;
  j["lexicon"] = o.lexicon_path.empty() ? "builtin" : o.lexicon_path;
  j["filters"] = filters_to_json(s.filters);
  j["seed"] = s.seed;
  j["out"] = o.out_dir;
  j["percent"] = o.percent;
  j["per_case_identity"] = o.per_case_identity;
  j["tails"] = o.tails;
  j["test"] = o.test;
  j["resamples"] = o.resamples;
  j["min_exhibits"] = o.min_exhibits;
  j["min_exchanges"] = o.min_exchanges;
  return j;
}

void write_config(const std::string& dir, const json& config) {
  write_file(dir, "config.json", config.dump(2) + "\n");
}

// --- coordinate -------------------------------------------------------------

struct CoordinateOpts {
  CommonOpts common;
  std::string speakers = "*";
  std::string targets = "*";
};

int cmd_coordinate(const CoordinateOpts& o) {
  Session s = open_session(o.common, true);
  ProfileRequest req;
  req.speakers = label_group(*s.corpus, o.speakers);
  req.targets = label_group(*s.corpus, o.targets);
  req.filters = s.filters;
  req.config = s.coord_config;
  GroupProfile profile = coordination_profile(*s.corpus, req);
  json config = common_config_json("coordinate", o.common, s);
  config["speakers"] = o.speakers;
  config["targets"] = o.targets;
  write_config(o.common.out_dir, config);
  write_file(o.common.out_dir, "profile.csv", profile_csv(profile));
  write_file(o.common.out_dir, "profile.json", profile_json(profile));
  if (o.common.svg) {
    ComparisonReport fake;
    fake.group_a = profile.speaker_group + "->" + profile.target_group;
    fake.group_b = "";
    for (const std::string& metric : metric_names()) {
      MetricComparison mc;
      mc.metric = metric;
      mc.mean_a = profile.metric_mean(metric);
      mc.n_a = profile.metric_population(metric);
      fake.entries.push_back(std::move(mc));
    }
    write_file(o.common.out_dir, "profile.svg", comparison_svg(fake, o.common.percent));
  }
  std::cout << profile_pretty(profile, o.common.percent);
  return 0;
}

// --- compare ----------------------------------------------------------------

struct CompareOpts {
  CommonOpts common;
  // label mode
  std::string a_speakers, a_targets, b_speakers, b_targets;
  // scheme mode
  std::string scheme;
  std::string group_a, group_b;
  std::string as = "speakers";       // which side the scheme groups sit on
  std::string scheme_side = "*";     // role label of the scheme-classified side (pair schemes)
  std::string other = "*";           // label of the opposite side
  std::string direction = "none";    // a_greater | a_less | none
};

int cmd_compare(const CompareOpts& o) {
  Session s = open_session(o.common, true);
  const Corpus& corpus = *s.corpus;

  auto profile_of = [&](const Group& speakers, const Group& targets,
                        std::optional<PairGroup> pairs) {
    ProfileRequest req;
    req.speakers = speakers;
    req.targets = targets;
    req.filters = s.filters;
    req.pairs = std::move(pairs);
    req.config = s.coord_config;
    return coordination_profile(corpus, req);
  };

  std::optional<GroupProfile> a, b;
  if (!o.scheme.empty()) {
    GroupPartition partition = partition_groups(corpus, GroupScheme::parse(o.scheme));
    auto find_group = [&](const std::string& label) -> const Group* {
      for (const auto& g : partition.groups) {
        if (g.label == label) return &g;
      }
      return nullptr;
    };
    auto find_pairs = [&](const std::string& label) -> const PairGroup* {
      for (const auto& g : partition.pair_groups) {
        if (g.label == label) return &g;
      }
      return nullptr;
    };
    bool scheme_as_speakers = o.as == "speakers";
    for (const std::string* side : {&o.group_a, &o.group_b}) {
      std::optional<GroupProfile>& slot = side == &o.group_a ? a : b;
      if (const Group* g = find_group(*side)) {
        Group other = label_group(corpus, o.other);
        slot = scheme_as_speakers ? profile_of(*g, other, std::nullopt)
                                  : profile_of(other, *g, std::nullopt);
      } else if (const PairGroup* pg = find_pairs(*side)) {
        Group scheme_side = label_group(corpus, o.scheme_side);
        Group other = label_group(corpus, o.other);
        scheme_side.label = *side + ":" + scheme_side.label;
        slot = scheme_as_speakers ? profile_of(scheme_side, other, *pg)
                                  : profile_of(other, scheme_side, *pg);
      } else {
        throw_config("UnknownScheme",
                     "scheme '" + partition.scheme + "' has no group '" + *side + "'");
      }
    }
  } else {
    if (o.a_speakers.empty() || o.b_speakers.empty()) {
      throw_config("InvalidSpec",
                   "compare needs either --scheme or --a-speakers/--a-targets/"
                   "--b-speakers/--b-targets");
    }
    a = profile_of(label_group(corpus, o.a_speakers), label_group(corpus, o.a_targets),
                   std::nullopt);
    b = profile_of(label_group(corpus, o.b_speakers), label_group(corpus, o.b_targets),
                   std::nullopt);
  }

  std::optional<Direction> direction;
  if (o.direction == "a_greater") direction = Direction::greater;
  else if (o.direction == "a_less") direction = Direction::less;
  else if (o.direction != "none") throw_config("InvalidSpec", "--direction must be a_greater|a_less|none");

  ComparisonReport report = compare_groups(*a, *b, direction, s.stats_config);
  json config = common_config_json("compare", o.common, s);
  config["a_speakers"] = o.a_speakers;
  config["a_targets"] = o.a_targets;
  config["b_speakers"] = o.b_speakers;
  config["b_targets"] = o.b_targets;
  config["scheme"] = o.scheme;
  config["group_a"] = o.group_a;
  config["group_b"] = o.group_b;
  config["as"] = o.as;
  config["scheme_side"] = o.scheme_side;
  config["other"] = o.other;
  config["direction"] = o.direction;
  write_config(o.common.out_dir, config);
  write_file(o.common.out_dir, "comparison.csv", comparison_csv(report));
  write_file(o.common.out_dir, "comparison.json", comparison_json(report));
  write_file(o.common.out_dir, "plot.csv", comparison_plot_csv(report));
  if (o.common.svg) {
    write_file(o.common.out_dir, "comparison.svg", comparison_svg(report, o.common.percent));
  }
  std::cout << comparison_pretty(report, o.common.percent);
  return 0;
}

// --- hypotheses ---------------------------------------------------------------

struct HypothesesOpts {
  CommonOpts common;
  std::string high, low;
  std::string universe = "*";
};

int cmd_hypotheses(const HypothesesOpts& o) {
  Session s = open_session(o.common, true);
  HypothesisReport report =
      evaluate_hypotheses(*s.corpus, label_group(*s.corpus, o.high),
                          label_group(*s.corpus, o.low), label_group(*s.corpus, o.universe),
                          s.filters, s.coord_config, s.stats_config);
  json config = common_config_json("hypotheses", o.common, s);
  config["high"] = o.high;
  config["low"] = o.low;
  config["universe"] = o.universe;
  write_config(o.common.out_dir, config);
  write_file(o.common.out_dir, "hypotheses.json", hypotheses_json(report));
  write_file(o.common.out_dir, "hypotheses.csv", hypotheses_csv(report));
  std::cout << "P_target (" << report.p_target.verdict_metric
            << "): " << verdict_name(report.p_target.verdict) << "\n"
            << "P_speaker (" << report.p_speaker.verdict_metric
            << "): " << verdict_name(report.p_speaker.verdict) << "\n";
  return 0;
}

// --- timeline -----------------------------------------------------------------

struct TimelineOpts {
  CommonOpts common;
  std::string role = "admin";
  int window = 12;
  int min_population = 5;
};

int cmd_timeline(const TimelineOpts& o) {
  Session s = open_session(o.common, true);
  s.stats_config.timeline_min_population = o.min_population;
  TimelineSeries series = timeline(*s.corpus, o.role, o.window, s.coord_config, s.stats_config);
  json config = common_config_json("timeline", o.common, s);
  config["role"] = o.role;
  config["window"] = o.window;
  config["min_population"] = o.min_population;
  write_config(o.common.out_dir, config);
  write_file(o.common.out_dir, "timeline.csv", timeline_csv(series));
  write_file(o.common.out_dir, "timeline.json", timeline_json(series));
  std::cout << "timeline: " << series.participants_with_event << " participants with a '"
            << o.role << "' promotion\n";
  return 0;
}

// --- predict ------------------------------------------------------------------

struct PredictOpts {
  CommonOpts common;
  std::string spec_path;
};

int cmd_predict(const PredictOpts& o) {
  std::ifstream in(o.spec_path);
  if (!in) throw_config("InvalidSpec", "cannot open prediction spec: " + o.spec_path);
  json spec = json::parse(in, nullptr, false);
  if (spec.is_discarded() || !spec.is_object()) {
    throw_config("InvalidSpec", "prediction spec is not a JSON object");
  }
  Session s = open_session(o.common, false);
  std::uint64_t seed = spec.value("seed", s.seed);
  int folds = spec.value("folds", 5);
  Hyperparams hp;
  if (auto it = spec.find("hyperparams"); it != spec.end()) {
    hp.c = it->value("c", 1.0);
    hp.max_iters = it->value("max_iters", 100000);
    hp.tol = it->value("tol", 1e-6);
  }
  hp.seed = seed;
  std::vector<FeatureKind> kinds;
  if (auto it = spec.find("kinds"); it != spec.end()) {
    for (const auto& k : *it) kinds.push_back(feature_kind_from_name(k.get<std::string>()));
  } else {
    kinds = {FeatureKind::coordination, FeatureKind::stylistic, FeatureKind::bow};
  }

  struct DomainData {
    std::string tag;
    Corpus corpus;
    PairDataset dataset;
  };
  std::vector<DomainData> domains;
  auto domain_specs = spec.find("domains");
  if (domain_specs == spec.end() || !domain_specs->is_array() || domain_specs->empty()) {
    throw_config("InvalidSpec", "prediction spec needs a non-empty 'domains' array");
  }
  domains.reserve(domain_specs->size());  // datasets hold pointers into their corpus
  for (const json& d : *domain_specs) {
    std::string tag = d.value("tag", std::string("domain"));
    LoadOptions opts;
    opts.per_case_identity = d.value("per_case_identity", false);
    Corpus corpus = Corpus::load_files(d.value("utterances", std::string()),
                                       d.value("participants", std::string()),
                                       d.value("cases", std::string()), s.lexicon, opts);
    FilterSpec filters = parse_filters(d.contains("filters") ? d["filters"].dump() : "");
    std::string high = d.value("high_label", std::string());
    std::string low = d.value("low_label", std::string());
    if (high.empty() || low.empty()) {
      throw_config("InvalidSpec", "each domain needs high_label and low_label");
    }
    domains.push_back({tag, std::move(corpus), {}});
    domains.back().dataset =
        build_pairs(domains.back().corpus, high, low, tag, filters, seed);
  }

  std::vector<GridCell> cells;
  for (const auto& d : domains) {
    for (FeatureKind kind : kinds) {
      GridCell cell;
      cell.train_domain = d.tag;
      cell.test_domain = d.tag;
      cell.protocol = "in_domain";
      cell.kind = kind;
      cell.result = evaluate_in_domain(d.dataset, kind, folds, seed, hp, s.coord_config);
      cells.push_back(std::move(cell));
    }
  }
  for (const auto& train : domains) {
    for (const auto& test : domains) {
      if (&train == &test) continue;
      for (FeatureKind kind : kinds) {
        GridCell cell;
        cell.train_domain = train.tag;
        cell.test_domain = test.tag;
        cell.protocol = "cross_domain";
        cell.kind = kind;
        cell.result =
            evaluate_cross_domain(train.dataset, test.dataset, kind, hp, s.coord_config);
        cells.push_back(std::move(cell));
      }
    }
  }

  json config = common_config_json("predict", o.common, s);
  config["spec"] = o.spec_path;
  config["resolved_spec"] = spec;
  config["folds"] = folds;
  write_config(o.common.out_dir, config);
  write_file(o.common.out_dir, "grid.csv", prediction_grid_csv(cells));
  write_file(o.common.out_dir, "grid.json", prediction_grid_json(cells));
  std::cout << prediction_grid_csv(cells);
  return 0;
}

// --- simulate -----------------------------------------------------------------

struct SimulateOpts {
  CommonOpts common;
  std::string genspec_path;
};

int cmd_simulate(const SimulateOpts& o) {
  Session s = open_session(o.common, false);
  GenSpec spec = GenSpec::from_file(o.genspec_path);
  SynthOutput out = generate(spec, s.lexicon);
  json config = common_config_json("simulate", o.common, s);
  config["genspec"] = o.genspec_path;
  write_config(o.common.out_dir, config);
  write_file(o.common.out_dir, "utterances.jsonl", out.utterances_jsonl);
  write_file(o.common.out_dir, "participants.jsonl", out.participants_jsonl);
  write_file(o.common.out_dir, "oracle.json", oracle_json_text(spec));
  write_file(o.common.out_dir, "genspec.json", spec.to_json_text());
  std::cout << "simulated corpus written to " << o.common.out_dir << "\n";
  return 0;
}

// --- validate -----------------------------------------------------------------

int cmd_validate(const CommonOpts& o) {
  Session s = open_session(o, true);
  const Corpus& corpus = *s.corpus;
  ExchangeSet exchanges = derive_exchanges(corpus);
  json j;
  j["utterances"] = corpus.utterances().size();
  j["participants"] = corpus.participants().size();
  j["cases"] = corpus.cases().size();
  j["exchanges"] = exchanges.size();
  j["warnings"] = {{"self_replies_skipped", corpus.warnings().self_replies_skipped},
                   {"cross_conversation_replies_skipped",
                    corpus.warnings().cross_conversation_replies_skipped}};
  j["lexicon"] = {{"source", s.lexicon.source_id()}, {"lexemes", s.lexicon.total_lexemes()}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"linguistic coordination analysis toolkit"};
  app.require_subcommand(1);

  CoordinateOpts coord;
  auto* c_coord = app.add_subcommand("coordinate", "group coordination profile");
  add_common(c_coord, coord.common, true);
  c_coord->add_option("--speakers", coord.speakers, "speaker group label (* = everyone)");
  c_coord->add_option("--targets", coord.targets, "target group label (* = everyone)");

  CompareOpts cmp;
  auto* c_cmp = app.add_subcommand("compare", "compare two coordination profiles");
  add_common(c_cmp, cmp.common, true);
  c_cmp->add_option("--a-speakers", cmp.a_speakers, "side A speaker label");
  c_cmp->add_option("--a-targets", cmp.a_targets, "side A target label");
  c_cmp->add_option("--b-speakers", cmp.b_speakers, "side B speaker label");
  c_cmp->add_option("--b-targets", cmp.b_targets, "side B target label");
  c_cmp->add_option("--scheme", cmp.scheme, "partition scheme, e.g. before_after:admin:30");
  c_cmp->add_option("--group-a", cmp.group_a, "scheme group for side A");
  c_cmp->add_option("--group-b", cmp.group_b, "scheme group for side B");
  c_cmp->add_option("--as", cmp.as, "scheme groups act as speakers|targets")
      ->check(CLI::IsMember({"speakers", "targets"}));
  c_cmp->add_option("--scheme-side", cmp.scheme_side,
                    "label of the scheme-classified side (pair schemes)");
  c_cmp->add_option("--other", cmp.other, "label of the opposite side");
  c_cmp->add_option("--direction", cmp.direction, "a_greater|a_less|none");

  HypothesesOpts hyp;
  auto* c_hyp = app.add_subcommand("hypotheses", "evaluate P_target and P_speaker");
  add_common(c_hyp, hyp.common, true);
  c_hyp->add_option("--high", hyp.high, "high-power group label")->required();
  c_hyp->add_option("--low", hyp.low, "low-power group label")->required();
  c_hyp->add_option("--universe", hyp.universe, "universe label (* = everyone)");

  TimelineOpts tl;
  auto* c_tl = app.add_subcommand("timeline", "coordination around status changes");
  add_common(c_tl, tl.common, true);
  c_tl->add_option("--role", tl.role, "promotion role")->required();
  c_tl->add_option("--window", tl.window, "window in 30-day months");
  c_tl->add_option("--min-population", tl.min_population, "min speakers per bucket");

  PredictOpts pred;
  auto* c_pred = app.add_subcommand("predict", "status prediction grid");
  add_common(c_pred, pred.common, false);
  c_pred->add_option("--spec", pred.spec_path, "prediction spec JSON")->required();

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "generate a synthetic corpus with oracle");
  add_common(c_sim, sim.common, false);
  c_sim->add_option("--genspec", sim.genspec_path, "generator spec JSON")->required();

  CommonOpts val;
  auto* c_val = app.add_subcommand("validate", "load a corpus and report statistics");
  add_common(c_val, val, true);

  try {
    app.parse(argc, argv);
    if (c_coord->parsed()) return cmd_coordinate(coord);
    if (c_cmp->parsed()) return cmd_compare(cmp);
    if (c_hyp->parsed()) return cmd_hypotheses(hyp);
    if (c_tl->parsed()) return cmd_timeline(tl);
    if (c_pred->parsed()) return cmd_predict(pred);
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_val->parsed()) return cmd_validate(val);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    json err;
    err["error"] = {{"code", "Usage"}, {"class", "config"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    json err;
    err["error"] = {{"code", e.code()},
                    {"class", e.error_class() == ErrorClass::config ? "config" : "data"},
                    {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return e.error_class() == ErrorClass::config ? 2 : 3;
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"code", "Internal"}, {"class", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}

}  // namespace coordlab
