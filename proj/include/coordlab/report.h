#pragma once

#include <string>
#include <vector>

#include "coordlab/coordination.h"
#include "coordlab/prediction.h"
#include "coordlab/stats.h"

namespace coordlab {

// Deterministic formatting shared by every export (%.12g).
std::string fmt_double(double v);

// Profile export: CSV rows (speaker_group, target_group, metric, mean,
// population, n_exchanges) for the 8 markers and the 3 aggregates; values in
// natural units, flagged in the header.
std::string profile_csv(const GroupProfile& profile);
// Detail dump including per-speaker counts.
std::string profile_json(const GroupProfile& profile);

std::string comparison_csv(const ComparisonReport& report);
std::string comparison_json(const ComparisonReport& report);
// Plot-data CSV: one row per metric, one column per series.
std::string comparison_plot_csv(const ComparisonReport& report);
// Self-contained grouped bar chart with bootstrap whiskers and stars.
std::string comparison_svg(const ComparisonReport& report, bool percent);

std::string hypotheses_json(const HypothesisReport& report);
std::string hypotheses_csv(const HypothesisReport& report);

std::string timeline_csv(const TimelineSeries& series);
std::string timeline_json(const TimelineSeries& series);

struct GridCell {
  std::string train_domain, test_domain;
  std::string protocol;  // "in_domain" | "cross_domain"
  FeatureKind kind = FeatureKind::coordination;
  EvalResult result;
};

std::string prediction_grid_csv(const std::vector<GridCell>& cells);
std::string prediction_grid_json(const std::vector<GridCell>& cells);

// Human-readable table for stdout; percent scales values by 100 for display.
std::string profile_pretty(const GroupProfile& profile, bool percent);
std::string comparison_pretty(const ComparisonReport& report, bool percent);

}  // namespace coordlab
