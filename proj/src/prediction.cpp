#include "coordlab/prediction.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "coordlab/error.h"

namespace coordlab {

std::string feature_kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::coordination: return "coordination";
    case FeatureKind::stylistic: return "stylistic";
    case FeatureKind::bow: return "bow";
  }
  return "coordination";
}

FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "coordination") return FeatureKind::coordination;
  if (name == "stylistic") return FeatureKind::stylistic;
  if (name == "bow") return FeatureKind::bow;
  throw_config("InvalidSpec", "unknown feature kind '" + name + "'");
}

PairDataset build_pairs(const Corpus& corpus, const std::string& high_label,
                        const std::string& low_label, const std::string& domain_tag,
                        const FilterSpec& filters, std::uint64_t seed) {
  PairDataset ds;
  ds.corpus = &corpus;
  ds.domain = domain_tag;
  ds.high_label = high_label;
  ds.low_label = low_label;

  ExchangeSet exchanges = derive_exchanges(corpus);
  if (!filters.empty()) exchanges = filter_exchanges(exchanges, filters);

  struct Replies {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> high_to_low, low_to_high;
  };
  std::map<std::pair<std::string, std::string>, Replies> by_pair;  // (high, low)
  for (std::size_t i = 0; i < exchanges.size(); ++i) {
    Exchange e = exchanges.at(i);
    const Participant& sp = corpus.participant(e.reply->speaker_id);
    const Participant& tp = corpus.participant(e.target->speaker_id);
    if (sp.has_label(high_label) && tp.has_label(low_label)) {
      by_pair[{e.reply->speaker_id, e.target->speaker_id}].high_to_low.push_back(
          exchanges.indices()[i]);
    } else if (sp.has_label(low_label) && tp.has_label(high_label)) {
      by_pair[{e.target->speaker_id, e.reply->speaker_id}].low_to_high.push_back(
          exchanges.indices()[i]);
    }
  }

  std::vector<std::pair<std::pair<std::string, std::string>, Replies>> eligible;
  for (auto& [ids, replies] : by_pair) {
    if (!replies.high_to_low.empty() && !replies.low_to_high.empty()) {
      eligible.emplace_back(ids, std::move(replies));
    }
  }
  if (eligible.empty()) {
    throw_config("NoPairs", "no conversing (" + high_label + ", " + low_label + ") pairs found");
  }

  // Seeded shuffle, then alternate orientation for an exact 50/50 balance.
  std::mt19937_64 rng(seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    auto& [ids, replies] = eligible[i];
    PairInstance inst;
    inst.domain = domain_tag;
    bool x_is_high = (i % 2) == 0;
    inst.label = x_is_high;
    if (x_is_high) {
      inst.x_id = ids.first;
      inst.y_id = ids.second;
      inst.exchanges_x = std::move(replies.high_to_low);
      inst.exchanges_y = std::move(replies.low_to_high);
    } else {
      inst.x_id = ids.second;
      inst.y_id = ids.first;
      inst.exchanges_x = std::move(replies.low_to_high);
      inst.exchanges_y = std::move(replies.high_to_low);
    }
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

namespace {

std::array<MarkerCoordination, kNumMarkers> pair_direction_coordination(
    const Corpus& corpus, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& idx,
    const CoordinationConfig& config) {
  ExchangeSet set(&corpus, idx, "pair");
  return coord_markers(set, config);
}

}  // namespace

bool pair_has_full_coordination(const Corpus& corpus, const PairInstance& p,
                                const CoordinationConfig& config) {
  for (const auto* idx : {&p.exchanges_x, &p.exchanges_y}) {
    auto markers = pair_direction_coordination(corpus, *idx, config);
    for (const auto& mc : markers) {
      if (!mc.defined) return false;
    }
  }
  return true;
}

std::uint32_t BowVocab::dimension() const {
  return static_cast<std::uint32_t>(x_index.size() + y_index.size());
}

namespace {

const Utterance& reply_of(const Corpus& corpus, std::pair<std::uint32_t, std::uint32_t> idx) {
  return corpus.utterances()[idx.second];
}

std::map<std::string, std::uint32_t> top_words(
    const std::unordered_map<std::string, std::int64_t>& counts, std::size_t limit,
    std::uint32_t index_base) {
  std::vector<std::pair<std::int64_t, std::string>> ranked;
  ranked.reserve(counts.size());
  for (const auto& [w, n] : counts) ranked.emplace_back(-n, w);  // count desc, word asc
  std::sort(ranked.begin(), ranked.end());
  if (ranked.size() > limit) ranked.resize(limit);
  std::map<std::string, std::uint32_t> out;
  std::uint32_t i = index_base;
  for (const auto& [neg, w] : ranked) out.emplace(w, i++);
  return out;
}

}  // namespace

BowVocab BowVocab::build(const Corpus& corpus, const std::vector<const PairInstance*>& training,
                         std::size_t per_block) {
  std::unordered_map<std::string, std::int64_t> x_counts, y_counts;
  for (const PairInstance* p : training) {
    for (const auto& idx : p->exchanges_x) {
      for (const auto& tok : reply_of(corpus, idx).tokens.tokens) ++x_counts[tok];
    }
    for (const auto& idx : p->exchanges_y) {
      for (const auto& tok : reply_of(corpus, idx).tokens.tokens) ++y_counts[tok];
    }
  }
  BowVocab v;
  v.x_index = top_words(x_counts, per_block, 0);
  v.y_index = top_words(y_counts, per_block, static_cast<std::uint32_t>(v.x_index.size()));
  return v;
}

FeatureVector extract_features(const Corpus& corpus, const PairInstance& p, FeatureKind kind,
                               const BowVocab* vocab, const CoordinationConfig& config) {
  FeatureVector f;
  f.kind = kind;
  switch (kind) {
    case FeatureKind::coordination: {
      f.dimension = kNumMarkers + 1;
      auto cx = pair_direction_coordination(corpus, p.exchanges_x, config);
      auto cy = pair_direction_coordination(corpus, p.exchanges_y, config);
      for (int m = 0; m < kNumMarkers; ++m) {
        if (!cx[m].defined || !cy[m].defined) {
          throw_config("UndefinedCoordination",
                       "pair (" + p.x_id + ", " + p.y_id + ") lacks coordination on '" +
                           marker_name(m) + "'; filter such pairs out first");
        }
        if (cx[m].value > cy[m].value) f.values.emplace_back(m, 1.0);
      }
      std::array<std::optional<double>, kNumMarkers> no_means{};
      auto ax = aggregate_speaker(cx, AggScheme::one, no_means);
      auto ay = aggregate_speaker(cy, AggScheme::one, no_means);
      if (ax && ay && *ax > *ay) f.values.emplace_back(kNumMarkers, 1.0);
      break;
    }
    case FeatureKind::stylistic: {
      f.dimension = 2 * kNumMarkers + 2;
      auto block = [&](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& idx,
                       std::uint32_t base, std::uint32_t len_slot) {
        std::int64_t total_tokens = 0;
        std::array<std::int64_t, kNumMarkers> marker_tokens{};
        for (const auto& e : idx) {
          const Utterance& u = reply_of(corpus, e);
          total_tokens += static_cast<std::int64_t>(u.tokens.size());
          for (const auto& tok : u.tokens.tokens) {
            for (int m = 0; m < kNumMarkers; ++m) {
              if (corpus.lexicon().category(m).contains(tok)) ++marker_tokens[m];
            }
          }
        }
        for (int m = 0; m < kNumMarkers; ++m) {
          if (total_tokens > 0 && marker_tokens[m] > 0) {
            f.values.emplace_back(base + m, static_cast<double>(marker_tokens[m]) /
                                                static_cast<double>(total_tokens));
          }
        }
        if (!idx.empty()) {
          f.values.emplace_back(len_slot, static_cast<double>(total_tokens) /
                                              static_cast<double>(idx.size()));
        }
      };
      block(p.exchanges_x, 0, 2 * kNumMarkers);
      block(p.exchanges_y, kNumMarkers, 2 * kNumMarkers + 1);
      break;
    }
    case FeatureKind::bow: {
      if (!vocab) throw_config("InvalidSpec", "bag-of-words features need a vocabulary");
      f.dimension = vocab->dimension();
      auto block = [&](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& idx,
                       const std::map<std::string, std::uint32_t>& index) {
        std::map<std::uint32_t, double> counts;
        for (const auto& e : idx) {
          for (const auto& tok : reply_of(corpus, e).tokens.tokens) {
            auto it = index.find(tok);
            if (it != index.end()) counts[it->second] += 1.0;
          }
        }
        double norm = 0.0;
        for (const auto& [i, c] : counts) norm += c * c;
        norm = std::sqrt(norm);
        for (const auto& [i, c] : counts) f.values.emplace_back(i, c / norm);
      };
      block(p.exchanges_x, vocab->x_index);
      block(p.exchanges_y, vocab->y_index);
      break;
    }
  }
  std::sort(f.values.begin(), f.values.end());
  return f;
}

double LinearModel::decision(const FeatureVector& f) const {
  double s = weights.empty() ? 0.0 : weights[dimension];  // bias feature
  for (const auto& [i, v] : f.values) s += weights[i] * v;
  return s;
}

double LinearModel::objective(const std::vector<FeatureVector>& xs,
                              const std::vector<bool>& ys) const {
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double y = ys[i] ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - y * decision(xs[i]));
  }
  return 0.5 * reg + hp.c * loss;
}

LinearModel train(const std::vector<FeatureVector>& features, const std::vector<bool>& labels,
                  std::uint32_t dimension, const Hyperparams& hp) {
  if (features.empty() || features.size() != labels.size()) {
    throw_config("InvalidSpec", "training needs a non-empty, consistently sized dataset");
  }
  bool has_pos = false, has_neg = false;
  for (bool l : labels) (l ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw_config("SingleClassDataset", "training needs both labels present");
  }

  const std::size_t n = features.size();
  LinearModel model;
  model.dimension = dimension;
  model.hp = hp;
  model.weights.assign(dimension + 1, 0.0);

  // Dual coordinate descent for the L1-hinge SVM. Q_ii includes the
  // augmented bias feature.
  std::vector<double> qii(n), alpha(n, 0.0), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = 1.0;  // bias feature
    for (const auto& [idx, v] : features[i].values) q += v * v;
    qii[i] = q;
    y[i] = labels[i] ? 1.0 : -1.0;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(hp.seed);
  auto& w = model.weights;
  int iter = 0;
  for (; iter < hp.max_iters; ++iter) {
    std::shuffle(order.begin(), order.end(), rng);
    double pg_max = -1e300, pg_min = 1e300;
    for (std::size_t i : order) {
      double margin = w[dimension];
      for (const auto& [idx, v] : features[i].values) margin += w[idx] * v;
      double g = y[i] * margin - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] >= hp.c) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg != 0.0) {
        double old = alpha[i];
        alpha[i] = std::min(std::max(old - g / qii[i], 0.0), hp.c);
        double step = (alpha[i] - old) * y[i];
        if (step != 0.0) {
          w[dimension] += step;
          for (const auto& [idx, v] : features[i].values) w[idx] += step * v;
        }
      }
    }
    if (pg_max - pg_min < hp.tol) {
      ++iter;
      break;
    }
  }
  model.iterations_used = iter;
  return model;
}

double binomial_two_sided_p(std::int64_t correct, std::int64_t n) {
  if (n <= 0) return 1.0;
  // Exact equal-tail test against 0.5: sum the probabilities of outcomes at
  // least as far from n/2 as the observed count.
  double center = 0.5 * static_cast<double>(n);
  double dist = std::fabs(static_cast<double>(correct) - center);
  double p = 0.0;
  double log_half_n = static_cast<double>(n) * std::log(0.5);
  for (std::int64_t k = 0; k <= n; ++k) {
    if (std::fabs(static_cast<double>(k) - center) + 1e-12 < dist) continue;
    double log_prob = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                      log_half_n;
    p += std::exp(log_prob);
  }
  return std::min(p, 1.0);
}

std::vector<const PairInstance*> usable_instances(const PairDataset& dataset, FeatureKind kind,
                                                  const CoordinationConfig& config) {
  std::vector<const PairInstance*> out;
  for (const PairInstance& p : dataset.instances) {
    if (kind == FeatureKind::coordination &&
        !pair_has_full_coordination(*dataset.corpus, p, config)) {
      continue;
    }
    out.push_back(&p);
  }
  if (out.empty()) {
    throw_config("NoPairs", "no usable pairs for feature kind '" + feature_kind_name(kind) + "'");
  }
  return out;
}

namespace {

struct PreparedSet {
  std::vector<FeatureVector> features;
  std::vector<bool> labels;
  std::uint32_t dimension = 0;
};

PreparedSet prepare(const Corpus& corpus, const std::vector<const PairInstance*>& instances,
                    FeatureKind kind, const BowVocab* vocab, const CoordinationConfig& config) {
  PreparedSet set;
  for (const PairInstance* p : instances) {
    FeatureVector f = extract_features(corpus, *p, kind, vocab, config);
    set.dimension = f.dimension;
    set.features.push_back(std::move(f));
    set.labels.push_back(p->label);
  }
  return set;
}

}  // namespace

EvalResult evaluate_in_domain(const PairDataset& dataset, FeatureKind kind, int k,
                              std::uint64_t seed, const Hyperparams& hp,
                              const CoordinationConfig& config) {
  if (k < 2) throw_config("InvalidSpec", "cross-validation needs k >= 2");
  EvalResult result;
  result.train_domain = dataset.domain;
  result.test_domain = dataset.domain;
  result.kind = kind;

  std::vector<const PairInstance*> instances = usable_instances(dataset, kind, config);
  // Stratified folds: shuffle within each class, deal round-robin.
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    (instances[i]->label ? pos : neg).push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<int> fold_of(instances.size(), 0);
  int next = 0;
  for (std::size_t i : pos) fold_of[i] = next++ % k;
  for (std::size_t i : neg) fold_of[i] = next++ % k;

  double fold_acc_sum = 0.0;
  int folds_run = 0;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<const PairInstance*> train_inst, test_inst;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      (fold_of[i] == fold ? test_inst : train_inst).push_back(instances[i]);
    }
    if (test_inst.empty() || train_inst.empty()) continue;
    BowVocab vocab;
    const BowVocab* vocab_ptr = nullptr;
    if (kind == FeatureKind::bow) {
      vocab = BowVocab::build(*dataset.corpus, train_inst);
      vocab_ptr = &vocab;
    }
    PreparedSet train_set = prepare(*dataset.corpus, train_inst, kind, vocab_ptr, config);
    Hyperparams fold_hp = hp;
    fold_hp.seed = seed * 2654435761u + static_cast<std::uint64_t>(fold);
    LinearModel model = train(train_set.features, train_set.labels, train_set.dimension, fold_hp);
    FoldDetail detail;
    detail.fold = fold;
    for (const PairInstance* p : test_inst) {
      FeatureVector f = extract_features(*dataset.corpus, *p, kind, vocab_ptr, config);
      ++detail.n_test;
      if (model.predict(f) == p->label) ++detail.correct;
    }
    detail.accuracy = static_cast<double>(detail.correct) / detail.n_test;
    fold_acc_sum += detail.accuracy;
    ++folds_run;
    result.n += detail.n_test;
    result.correct += detail.correct;
    result.folds.push_back(detail);
  }
  result.accuracy = folds_run > 0 ? fold_acc_sum / folds_run : 0.0;
  result.binom_p = binomial_two_sided_p(result.correct, result.n);
  return result;
}

EvalResult evaluate_cross_domain(const PairDataset& train_set, const PairDataset& test_set,
                                 FeatureKind kind, const Hyperparams& hp,
                                 const CoordinationConfig& config) {
  EvalResult result;
  result.train_domain = train_set.domain;
  result.test_domain = test_set.domain;
  result.kind = kind;
  std::vector<const PairInstance*> train_inst = usable_instances(train_set, kind, config);
  std::vector<const PairInstance*> test_inst = usable_instances(test_set, kind, config);
  BowVocab vocab;
  const BowVocab* vocab_ptr = nullptr;
  if (kind == FeatureKind::bow) {
    vocab = BowVocab::build(*train_set.corpus, train_inst);
    vocab_ptr = &vocab;
  }
  PreparedSet prepared = prepare(*train_set.corpus, train_inst, kind, vocab_ptr, config);
  LinearModel model = train(prepared.features, prepared.labels, prepared.dimension, hp);
  for (const PairInstance* p : test_inst) {
    FeatureVector f = extract_features(*test_set.corpus, *p, kind, vocab_ptr, config);
    ++result.n;
    if (model.predict(f) == p->label) ++result.correct;
  }
  result.accuracy = result.n > 0 ? static_cast<double>(result.correct) / result.n : 0.0;
  result.binom_p = binomial_two_sided_p(result.correct, result.n);
  return result;
}

}  // namespace coordlab
