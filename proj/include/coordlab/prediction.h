#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coordlab/coordination.h"
#include "coordlab/corpus.h"

namespace coordlab {

// An (x, y) pair of different-status conversants; label = "x has the higher
// status". Exchange indices point into the owning corpus.
struct PairInstance {
  std::string x_id, y_id;
  std::string domain;
  bool label = false;
  // x's replies to y and vice versa, as (target, reply) utterance indices.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> exchanges_x;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> exchanges_y;
};

struct PairDataset {
  const Corpus* corpus = nullptr;
  std::string domain;
  std::string high_label, low_label;
  std::vector<PairInstance> instances;
};

// One instance per (high, low) couple with replies in both directions after
// filtering; orientation is seeded with an exact 50/50 balance target.
PairDataset build_pairs(const Corpus& corpus, const std::string& high_label,
                        const std::string& low_label, const std::string& domain_tag,
                        const FilterSpec& filters, std::uint64_t seed);

// True iff coordination is defined for all eight markers in both directions;
// the coordination-feature experiments drop the rest.
bool pair_has_full_coordination(const Corpus& corpus, const PairInstance& p,
                                const CoordinationConfig& config = {});

enum class FeatureKind { coordination, stylistic, bow };
std::string feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_name(const std::string& name);

struct FeatureVector {
  FeatureKind kind = FeatureKind::coordination;
  std::vector<std::pair<std::uint32_t, double>> values;  // sparse, index ascending
  std::uint32_t dimension = 0;
};

// Bag-of-words vocabulary: top words per block by training-corpus frequency.
struct BowVocab {
  std::map<std::string, std::uint32_t> x_index, y_index;
  std::uint32_t dimension() const;
  static BowVocab build(const Corpus& corpus, const std::vector<const PairInstance*>& training,
                        std::size_t per_block = 10000);
};

// coordination: 9 bits (8 markers + Aggregated 1), bit i = 1 iff x coordinates
//   strictly more to y than y to x; ties are 0. Throws UndefinedCoordination
//   when a needed value is undefined (the pair should have been excluded).
// stylistic: 8 marker frequencies per reply block plus the two average
//   utterance lengths (18 features).
// bow: per-word frequencies in each block, each block L2-normalized.
FeatureVector extract_features(const Corpus& corpus, const PairInstance& p, FeatureKind kind,
                               const BowVocab* vocab = nullptr,
                               const CoordinationConfig& config = {});

struct Hyperparams {
  double c = 1.0;          // hinge penalty (larger = less regularization)
  int max_iters = 100000;  // outer passes of the solver
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

// Linear max-margin classifier: min 0.5*||w||^2 + C * sum hinge(y * f(x)),
// bias realized as an always-on augmented feature (regularized with w).
struct LinearModel {
  std::vector<double> weights;  // size = dimension + 1; last entry is the bias
  std::uint32_t dimension = 0;
  Hyperparams hp;
  int iterations_used = 0;

  double decision(const FeatureVector& f) const;
  bool predict(const FeatureVector& f) const { return decision(f) > 0.0; }
  double objective(const std::vector<FeatureVector>& xs, const std::vector<bool>& ys) const;
};

// Deterministic dual coordinate descent on the hinge loss.
LinearModel train(const std::vector<FeatureVector>& features, const std::vector<bool>& labels,
                  std::uint32_t dimension, const Hyperparams& hp);

// Exact two-sided binomial test of `correct` successes out of `n` against 0.5.
double binomial_two_sided_p(std::int64_t correct, std::int64_t n);

struct FoldDetail {
  int fold = 0;
  int n_test = 0;
  int correct = 0;
  double accuracy = 0.0;
};

struct EvalResult {
  std::string train_domain, test_domain;
  FeatureKind kind = FeatureKind::coordination;
  double accuracy = 0.0;  // mean of fold accuracies (in-domain) or plain accuracy
  int n = 0;              // instances evaluated
  int correct = 0;
  double binom_p = 1.0;   // pooled correct vs chance
  std::vector<FoldDetail> folds;
};

// Stratified k-fold within one domain; bow vocabulary is rebuilt from each
// training split.
EvalResult evaluate_in_domain(const PairDataset& dataset, FeatureKind kind, int k,
                              std::uint64_t seed, const Hyperparams& hp,
                              const CoordinationConfig& config = {});

// Fit on all of one domain, test on all of the other.
EvalResult evaluate_cross_domain(const PairDataset& train_set, const PairDataset& test_set,
                                 FeatureKind kind, const Hyperparams& hp,
                                 const CoordinationConfig& config = {});

// Instances usable for a feature kind (coordination drops pairs without full
// coordination in both directions).
std::vector<const PairInstance*> usable_instances(const PairDataset& dataset, FeatureKind kind,
                                                  const CoordinationConfig& config = {});

}  // namespace coordlab
