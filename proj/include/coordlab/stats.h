#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coordlab/coordination.h"
#include "coordlab/corpus.h"

namespace coordlab {

enum class Tails { one, two };
enum class Direction { greater, less };  // hypothesized sign of mean(a) - mean(b)
enum class TTestKind { student, welch };

struct TestResult {
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 0.5;      // one- or two-tailed per `tails`
  double p_two_tailed = 1.0; // always carried for reporting
  Tails tails = Tails::two;
  std::optional<Direction> direction;
  int stars = 0;  // from p_value: p<0.05 -> 1, p<0.01 -> 2, p<0.001 -> 3
};

int stars_for(double p);

// Two-sample t test; pooled-variance Student by default, Welch optional.
// One-tailed tests need an expected direction.
TestResult t_test(std::span<const double> a, std::span<const double> b, Tails tails,
                  std::optional<Direction> direction = std::nullopt,
                  TTestKind kind = TTestKind::student);

// Standard deviation of the mean over `resamples` with-replacement resamples.
// Resampling indexes a sorted copy, so the result depends only on the multiset
// of values and the seed.
double bootstrap_std(std::vector<double> values, int resamples, std::uint64_t seed);

// Exposed for accuracy tests.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

struct StatsConfig {
  TTestKind test = TTestKind::student;
  Tails tails = Tails::one;  // used when a direction is declared
  int bootstrap_resamples = 1000;
  std::uint64_t seed = 0;
  int timeline_min_population = 5;
};

struct MetricComparison {
  std::string metric;
  std::optional<double> mean_a, mean_b;
  int n_a = 0, n_b = 0;
  bool testable = false;
  std::string note;  // why untestable
  std::optional<TestResult> test;
  std::optional<double> boot_std_a, boot_std_b;
};

struct ComparisonReport {
  std::string group_a, group_b;
  std::optional<Direction> direction;
  std::vector<MetricComparison> entries;  // metric_names() order

  const MetricComparison* entry(const std::string& metric) const;
};

// Independent comparison of two group profiles using per-speaker values as
// samples. Entries with too few samples or zero variance are marked
// untestable instead of failing the report.
ComparisonReport compare_groups(const GroupProfile& a, const GroupProfile& b,
                                std::optional<Direction> direction, const StatsConfig& config);

enum class Verdict { supported, contradicted, inconclusive };
std::string verdict_name(Verdict v);

struct HypothesisResult {
  std::string hypothesis;  // "P_target" | "P_speaker"
  std::string high_group, low_group;
  ComparisonReport comparison;  // a = the side hypothesized higher
  Verdict verdict = Verdict::inconclusive;
  std::string verdict_metric;  // metric the verdict is based on
};

struct HypothesisReport {
  HypothesisResult p_target;
  HypothesisResult p_speaker;
};

// P_target: C(U, high) > C(U, low).  P_speaker: C(high, U) < C(low, U).
// Verdict: supported iff the directional p < 0.05, contradicted iff the
// opposite direction is significant, else inconclusive; based on agg1 when
// testable, else agg3.
HypothesisReport evaluate_hypotheses(const Corpus& corpus, const Group& high, const Group& low,
                                     const Group& universe, const FilterSpec& filters,
                                     const CoordinationConfig& coord_config,
                                     const StatsConfig& stats_config);

struct TimelineBucket {
  int bucket = 0;  // 30-day offsets; bucket 0 starts at the event
  std::optional<double> as_speaker;
  int speaker_population = 0;
  std::optional<double> as_target;
  int target_population = 0;
};

struct TimelineSeries {
  std::string role;
  std::vector<TimelineBucket> buckets;  // -window .. window-1
  std::size_t participants_with_event = 0;
  std::size_t no_event_excluded = 0;
};

// Aggregated-1 coordination around each participant's promotion event: the
// event users as repliers (as_speaker) and everyone replying to them
// (as_target). Buckets below min population stay undefined.
TimelineSeries timeline(const Corpus& corpus, const std::string& role, int window_months,
                        const CoordinationConfig& coord_config, const StatsConfig& stats_config);

}  // namespace coordlab
