#include "coordlab/stats.h"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "coordlab/error.h"
#include "coordlab/prediction.h"
#include "coordlab/synth.h"

using namespace coordlab;
using nlohmann::json;

namespace {

json load_reference() {
  std::ifstream in(std::string(COORDLAB_TEST_DATA) + "/stats_reference.json");
  REQUIRE(in);
  return json::parse(in);
}

}  // namespace

TEST_CASE("t test on identical samples") {
  std::vector<double> a = {1, 2, 3}, b = {1, 2, 3};
  TestResult r = t_test(a, b, Tails::one, Direction::greater);
  CHECK(r.t_stat == doctest::Approx(0.0));
  CHECK(r.p_value == doctest::Approx(0.5));
  CHECK(r.stars == 0);
}

TEST_CASE("t test fixed example against the reference implementation") {
  json ref = load_reference()["fixed_example"];
  std::vector<double> a = ref["a"].get<std::vector<double>>();
  std::vector<double> b = ref["b"].get<std::vector<double>>();
  TestResult r = t_test(a, b, Tails::two);
  CHECK(r.t_stat == doctest::Approx(ref["student"]["t"].get<double>()).epsilon(1e-9));
  CHECK(r.p_value == doctest::Approx(ref["student"]["p_two"].get<double>()).epsilon(1e-9));
}

TEST_CASE("t test error cases") {
  std::vector<double> flat = {5, 5};
  try {
    t_test(flat, flat, Tails::two);
    FAIL("expected DegenerateSample");
  } catch (const Error& e) {
    CHECK(e.code() == "DegenerateSample");
  }
  std::vector<double> one = {1.0};
  std::vector<double> two = {1.0, 2.0};
  try {
    t_test(one, two, Tails::two);
    FAIL("expected TooFewSamples");
  } catch (const Error& e) {
    CHECK(e.code() == "TooFewSamples");
  }
}

TEST_CASE("t test matches the reference implementation on 100 random pairs") {
  json ref = load_reference();
  for (const json& c : ref["ttest_cases"]) {
    std::vector<double> a = c["a"].get<std::vector<double>>();
    std::vector<double> b = c["b"].get<std::vector<double>>();
    TestResult student = t_test(a, b, Tails::two, std::nullopt, TTestKind::student);
    CHECK(student.t_stat == doctest::Approx(c["student"]["t"].get<double>()).epsilon(1e-6));
    CHECK(student.p_value ==
          doctest::Approx(c["student"]["p_two"].get<double>()).epsilon(1e-6));
    TestResult one = t_test(a, b, Tails::one, Direction::greater, TTestKind::student);
    CHECK(one.p_value ==
          doctest::Approx(c["student"]["p_one_greater"].get<double>()).epsilon(1e-6));
    TestResult welch = t_test(a, b, Tails::two, std::nullopt, TTestKind::welch);
    CHECK(welch.t_stat == doctest::Approx(c["welch"]["t"].get<double>()).epsilon(1e-6));
    CHECK(welch.p_value == doctest::Approx(c["welch"]["p_two"].get<double>()).epsilon(1e-6));
  }
}

TEST_CASE("regularized incomplete beta to 1e-10") {
  json ref = load_reference();
  for (const json& c : ref["betainc_cases"]) {
    double got = regularized_incomplete_beta(c["a"].get<double>(), c["b"].get<double>(),
                                             c["x"].get<double>());
    CHECK(got == doctest::Approx(c["value"].get<double>()).epsilon(1e-10));
  }
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("t test antisymmetry and one-tailed complement") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a, b;
    int na = 2 + static_cast<int>(rng() % 10);
    int nb = 2 + static_cast<int>(rng() % 10);
    for (int i = 0; i < na; ++i) a.push_back(gauss(rng) + 0.3);
    for (int i = 0; i < nb; ++i) b.push_back(gauss(rng));
    TestResult ab = t_test(a, b, Tails::two);
    TestResult ba = t_test(b, a, Tails::two);
    CHECK(ab.t_stat == doctest::Approx(-ba.t_stat).epsilon(1e-12));
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
    TestResult greater = t_test(a, b, Tails::one, Direction::greater);
    TestResult less = t_test(a, b, Tails::one, Direction::less);
    CHECK(greater.p_value + less.p_value == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("stars thresholds") {
  CHECK(stars_for(0.2) == 0);
  CHECK(stars_for(0.049) == 1);
  CHECK(stars_for(0.009) == 2);
  CHECK(stars_for(0.0009) == 3);
  CHECK(stars_for(0.05) == 0);
}

TEST_CASE("bootstrap_std basics") {
  std::vector<double> constant(25, 3.0);
  CHECK(bootstrap_std(constant, 500, 1) == doctest::Approx(0.0));

  std::vector<double> values;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) values.push_back((rng() % 1000) / 1000.0);
  CHECK(bootstrap_std(values, 1000, 42) == doctest::Approx(bootstrap_std(values, 1000, 42)));
  CHECK(bootstrap_std(values, 1000, 42) != doctest::Approx(bootstrap_std(values, 1000, 43)));

  // order invariance: resampling indexes a sorted copy
  std::vector<double> shuffled = values;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(bootstrap_std(shuffled, 1000, 42) == doctest::Approx(bootstrap_std(values, 1000, 42)));
}

TEST_CASE("bootstrap_std of a Bernoulli(1/2) mean matches the analytic value") {
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(i < 50 ? 0.0 : 1.0);
  double got = bootstrap_std(values, 10000, 7);
  // sqrt(p(1-p)/n) = 0.05
  CHECK(std::fabs(got - 0.05) < 0.01);
}

TEST_CASE("binomial reference values") {
  json ref = load_reference();
  for (const json& c : ref["binomial_cases"]) {
    double got = binomial_two_sided_p(c["k"].get<int>(), c["n"].get<int>());
    CHECK(got == doctest::Approx(c["p_two"].get<double>()).epsilon(1e-9));
  }
}

namespace {

GenSpec two_group_spec(double delta_high, double delta_low, int speakers, int exchanges,
                       std::uint64_t seed) {
  GenSpec spec;
  spec.seed = seed;
  spec.domain = "synthcmp";
  SynthGroup targets;
  targets.name = "tgt";
  targets.size = 25;
  targets.labels = {"target"};
  targets.baseline_p.fill(0.2);
  targets.delta.fill(0.0);
  targets.exhibit_q.fill(0.5);
  SynthGroup high = targets;
  high.name = "high";
  high.labels = {"high"};
  high.size = speakers;
  high.delta.fill(delta_high);
  SynthGroup low = targets;
  low.name = "low";
  low.labels = {"low"};
  low.size = speakers;
  low.delta.fill(delta_low);
  spec.groups = {targets, high, low};
  spec.lanes = {{"high", "tgt", exchanges}, {"low", "tgt", exchanges}};
  return spec;
}

GroupProfile profile_for(const Corpus& corpus, const std::string& speakers,
                         const std::string& targets) {
  ProfileRequest req;
  req.speakers = label_group(corpus, speakers);
  req.targets = label_group(corpus, targets);
  return coordination_profile(corpus, req);
}

}  // namespace

TEST_CASE("compare_groups detects a planted coordination gap") {
  GenSpec spec = two_group_spec(0.1, 0.4, 60, 120, 99);
  Corpus corpus = load_generated(generate(spec, Lexicon::builtin()), Lexicon::builtin());
  GroupProfile high = profile_for(corpus, "high", "target");
  GroupProfile low = profile_for(corpus, "low", "target");
  StatsConfig config;
  config.seed = 5;
  ComparisonReport r = compare_groups(low, high, Direction::greater, config);
  const MetricComparison* agg1 = r.entry("agg1");
  REQUIRE(agg1 != nullptr);
  REQUIRE(agg1->testable);
  CHECK(agg1->test->p_value < 0.001);
  CHECK(agg1->test->stars == 3);
  CHECK(*agg1->mean_a > *agg1->mean_b);
  CHECK(agg1->boot_std_a.has_value());
}

TEST_CASE("compare_groups marks single-speaker groups untestable") {
  GenSpec spec = two_group_spec(0.2, 0.2, 1, 40, 4);
  Corpus corpus = load_generated(generate(spec, Lexicon::builtin()), Lexicon::builtin());
  GroupProfile high = profile_for(corpus, "high", "target");
  GroupProfile low = profile_for(corpus, "low", "target");
  StatsConfig config;
  ComparisonReport r = compare_groups(high, low, std::nullopt, config);
  for (const auto& e : r.entries) {
    CHECK_FALSE(e.testable);
    CHECK(e.note == "TooFewSamples");
  }
}

TEST_CASE("evaluate_hypotheses on planted effects, and label swap flips them") {
  // U coordinates toward high targets with a larger delta than toward low
  // targets; high speakers coordinate less than low speakers.
  GenSpec spec;
  spec.seed = 31;
  spec.domain = "synthhyp";
  auto mk = [&](const std::string& name, const std::string& label, int size, double delta) {
    SynthGroup g;
    g.name = name;
    g.size = size;
    g.labels = {label};
    g.baseline_p.fill(0.2);
    g.delta.fill(delta);
    g.exhibit_q.fill(0.5);
    return g;
  };
  spec.groups = {mk("high_t", "admin", 20, 0.0),  mk("low_t", "user", 20, 0.0),
                 mk("u_to_high", "u", 50, 0.45),  mk("u_to_low", "u", 50, 0.15),
                 mk("high_s", "admin", 50, 0.15), mk("low_s", "user", 50, 0.45),
                 mk("u_t", "u", 20, 0.0)};
  spec.lanes = {{"u_to_high", "high_t", 80},
                {"u_to_low", "low_t", 80},
                {"high_s", "u_t", 80},
                {"low_s", "u_t", 80}};
  Corpus corpus = load_generated(generate(spec, Lexicon::builtin()), Lexicon::builtin());
  StatsConfig config;
  config.seed = 17;
  HypothesisReport report =
      evaluate_hypotheses(corpus, label_group(corpus, "admin"), label_group(corpus, "user"),
                          label_group(corpus, "u"), {}, {}, config);
  CHECK(report.p_target.verdict == Verdict::supported);
  CHECK(report.p_speaker.verdict == Verdict::supported);

  HypothesisReport swapped =
      evaluate_hypotheses(corpus, label_group(corpus, "user"), label_group(corpus, "admin"),
                          label_group(corpus, "u"), {}, {}, config);
  CHECK(swapped.p_target.verdict == Verdict::contradicted);
  CHECK(swapped.p_speaker.verdict == Verdict::contradicted);
}

TEST_CASE("timeline buckets around the status change") {
  // delta drops from 0.5 to 0.1 at the event in the middle of the range
  GenSpec spec;
  spec.seed = 8;
  spec.domain = "synthtl";
  spec.time_start = 1'000'000'000;
  spec.time_end = spec.time_start + 360LL * 86400LL;
  std::int64_t event_at = spec.time_start + 180LL * 86400LL;
  SynthGroup targets;
  targets.name = "tgt";
  targets.size = 10;
  targets.labels = {"other"};
  targets.baseline_p.fill(0.2);
  targets.delta.fill(0.0);
  targets.exhibit_q.fill(0.5);
  SynthGroup movers = targets;
  movers.name = "mover";
  movers.labels = {"promoted"};
  movers.size = 12;
  movers.delta.fill(0.5);
  movers.event = SynthGroup::Event{"admin", event_at, {}};
  movers.event->delta_after.fill(0.1);
  spec.groups = {targets, movers};
  spec.lanes = {{"mover", "tgt", 400}, {"tgt", "mover", 60}};
  Corpus corpus = load_generated(generate(spec, Lexicon::builtin()), Lexicon::builtin());
  StatsConfig config;
  config.timeline_min_population = 5;
  TimelineSeries series = timeline(corpus, "admin", 5, {}, config);
  REQUIRE(series.buckets.size() == 10);
  CHECK(series.participants_with_event == 12);

  auto bucket = [&](int b) -> const TimelineBucket& {
    for (const auto& tb : series.buckets) {
      if (tb.bucket == b) return tb;
    }
    FAIL("missing bucket");
    static TimelineBucket dummy;
    return dummy;
  };
  REQUIRE(bucket(-2).as_speaker.has_value());
  REQUIRE(bucket(1).as_speaker.has_value());
  // expected drop: 0.5*(1-q) = 0.25 before vs 0.1*(1-q) = 0.05 after
  CHECK(*bucket(-2).as_speaker > 0.15);
  CHECK(*bucket(1).as_speaker < 0.15);
  // the as-target series exists with populations
  CHECK(bucket(-2).target_population > 0);
}

TEST_CASE("timeline edge rules") {
  // 45 days after the event lands in bucket +1; empty buckets stay undefined
  std::ostringstream utt;
  const std::int64_t event = 1'000'000'000;
  const std::int64_t day = 86400;
  // both texts exhibit every marker category so agg1 is defined
  utt << R"({"id":"t1","conv_id":"c1","speaker":"o","reply_to":null,"ts":)" << event + 44 * day
      << R"(,"text":"the cat is very much of it and some i know"})" << "\n";
  utt << R"({"id":"r1","conv_id":"c1","speaker":"m","reply_to":"t1","ts":)" << event + 45 * day
      << R"(,"text":"the dog was actually under that and all you got"})" << "\n";
  std::string parts =
      R"({"id":"m","labels":[],"status_events":[{"role":"admin","at":1000000000,"outcome":"promoted"}]})"
      "\n"
      R"({"id":"x","labels":[],"status_events":[{"role":"admin","at":900,"outcome":"failed"}]})"
      "\n";
  std::istringstream in(utt.str());
  std::istringstream parts_in(parts);
  Corpus corpus = Corpus::load(in, &parts_in, nullptr, Lexicon::builtin());
  StatsConfig config;
  config.timeline_min_population = 1;
  TimelineSeries series = timeline(corpus, "admin", 3, {}, config);
  CHECK(series.no_event_excluded == 1);  // x has only a failed event
  for (const auto& b : series.buckets) {
    if (b.bucket == 1) {
      CHECK(b.speaker_population == 1);
    } else {
      CHECK(b.speaker_population == 0);
      CHECK_FALSE(b.as_speaker.has_value());  // undefined, not zero
    }
  }
}
