//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "scaffkit/selftrain/selftrain.h"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "scaffkit/error.h"
#include "scaffkit/metrics/metrics.h"
#include "scaffkit/util/random.h"

namespace scaffkit::selftrain {

std::size_t LabeledSet::actives() const {
  std::size_t n = 0;
  for (int y: labels)
    n += static_cast<std::size_t>(y == 1);
  return n;
}

double LabeledSet::active_fraction() const {
  return labels.empty() ? 0.0
                        : static_cast<double>(actives()) / static_cast<double>(size());
}

void LabeledSet::add(fp::Fingerprint f, int label, Origin o) {
  features.push_back(std::move(f));
  labels.push_back(label);
  origin.push_back(o);
}

void LabeledSet::append(const LabeledSet &other) {
  features.insert(features.end(), other.features.begin(), other.features.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  origin.insert(origin.end(), other.origin.begin(), other.origin.end());
}

LabeledSet LabeledSet::from_molecules(std::span<const chem::MolGraph> mols,
                                      std::span<const int> labels, Origin origin,
                                      const FeatureConfig &cfg) {
  if (mols.size() != labels.size())
    throw std::invalid_argument("one label per molecule required");
  LabeledSet out;
  for (std::size_t i = 0; i < mols.size(); ++i)
    out.add(fp::ecfp(mols[i], cfg.radius, cfg.nbits), labels[i], origin);
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0)
    return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticModel::LogisticModel(FeatureConfig cfg)
    : cfg_(cfg), weights_(cfg.nbits, 0.0) { }

double LogisticModel::score(const fp::Fingerprint &f) const {
  if (f.nbits() != cfg_.nbits)
    throw WidthMismatch("model expects " + std::to_string(cfg_.nbits)
                        + "-bit fingerprints, got " + std::to_string(f.nbits()));
  double z = bias_;
  for (auto b: f.on_bits())
    z += weights_[b];
  return z;
}

namespace {

// log(1 + e^{-|z|}) form of the cross-entropy with logits.
double bce_with_logit(double z, int y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

double penalty(const LogisticModel &model, double l2) {
  double sq = 0.0;
  for (double w: model.weights())
    sq += w * w;
  return 0.5 * l2 * sq;
}

}  // namespace

double loss_and_gradient(const LogisticModel &model,
                         std::span<const fp::Fingerprint> features,
                         std::span<const int> labels, double l2,
                         std::vector<double> *gradient) {
  if (features.size() != labels.size() || features.empty())
    throw std::invalid_argument("loss needs one label per example");
  const std::size_t nbits = model.weights().size();
  const double inv = 1.0 / static_cast<double>(features.size());
  if (gradient)
    gradient->assign(nbits + 1, 0.0);

  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto bits = features[i].on_bits();
    double z = model.bias();
    for (auto b: bits)
      z += model.weights()[b];
    loss += bce_with_logit(z, labels[i]);
    if (gradient) {
      const double dz = (sigmoid(z) - labels[i]) * inv;
      for (auto b: bits)
        (*gradient)[b] += dz;
      (*gradient)[nbits] += dz;
    }
  }
  if (gradient) {
    for (std::size_t j = 0; j < nbits; ++j)
      (*gradient)[j] += l2 * model.weights()[j];
  }
  return loss * inv + penalty(model, l2);
}

double dataset_loss(const LogisticModel &model, const LabeledSet &data, double l2) {
  return loss_and_gradient(model, data.features, data.labels, l2);
}

double train_epoch(LogisticModel &model, const LabeledSet &data, double lr,
                   std::uint64_t seed, const TrainOptions &opts) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i)
    (data.labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw DegenerateData("training data needs both actives and inactives");

  Rng rng(seed);
  std::vector<std::size_t> order;
  auto &minority = pos.size() < neg.size() ? pos : neg;
  auto &majority = pos.size() < neg.size() ? neg : pos;
  order.insert(order.end(), majority.begin(), majority.end());
  order.insert(order.end(), minority.begin(), minority.end());
  for (std::size_t extra = minority.size(); extra < majority.size(); ++extra)
    order.push_back(minority[rng.below(minority.size())]);
  rng.shuffle(order);

  const std::size_t batch = std::max<std::size_t>(opts.batch_size, 1);
  std::vector<fp::Fingerprint> xs;
  std::vector<int> ys;
  std::vector<double> grad;
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += batch) {
    xs.clear();
    ys.clear();
    for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k) {
      xs.push_back(data.features[order[k]]);
      ys.push_back(data.labels[order[k]]);
    }
    total += loss_and_gradient(model, xs, ys, opts.l2, &grad);
    ++batches;
    auto &w = model.weights();
    for (std::size_t j = 0; j < w.size(); ++j)
      w[j] -= lr * grad[j];
    model.bias() -= lr * grad.back();
  }
  return total / static_cast<double>(batches);
}

std::vector<double> predict(const Predictor &model,
                            std::span<const fp::Fingerprint> features) {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto &f: features)
    out.push_back(model.score(f));
  return out;
}

PseudoLabels pseudo_label(const Predictor &model,
                          std::span<const fp::Fingerprint> candidates, double tau) {
  PseudoLabels out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (sigmoid(model.score(candidates[i])) > tau) {
      out.set.add(candidates[i], 1, Origin::kPseudo);
      out.kept.push_back(i);
    }
  }
  return out;
}

void SelfTrainConfig::validate() const {
  if (epochs == 0 || e_start == 0 || e_start >= epochs)
    throw ConfigError("self-training needs 0 < e_start < epochs");
  if (e_freq == 0)
    throw ConfigError("e_freq must be at least 1");
  if (!(tau > 0.5 && tau < 1.0))
    throw ConfigError("tau must lie in (0.5, 1)");
  if (!(lr > 0.0))
    throw ConfigError("learning rate must be positive");
}

double poly_lr(const SelfTrainConfig &cfg, std::uint32_t epoch) {
  const double frac = 1.0 - static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
  return cfg.lr * std::pow(std::max(frac, 0.0), cfg.lr_power);
}

SelfTrainResult self_train(const LabeledSet &d,
                           std::span<const fp::Fingerprint> d_prime,
                           const LabeledSet &d_valid, const SelfTrainConfig &cfg,
                           FeatureConfig features) {
  cfg.validate();
  if (d_valid.actives() == 0)
    throw DegenerateLabels("validation set has no actives");

  SelfTrainResult result { LogisticModel(features), 0,
                           -std::numeric_limits<double>::infinity(),
                           LogisticModel(features), {} };
  LogisticModel &model = result.last;
  LabeledSet confident;
  bool have_confident = false;

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch >= cfg.e_start && epoch % cfg.e_freq == 0 && !d_prime.empty()) {
      confident = pseudo_label(model, d_prime, cfg.tau).set;
      have_confident = true;
    }
    const double lr = poly_lr(cfg, epoch);
    const std::uint64_t epoch_seed = derive_seed(cfg.seed, epoch);
    double loss;
    std::size_t n_pseudo = 0;
    if (epoch >= cfg.e_start && have_confident && confident.size() > 0) {
      LabeledSet train = d;
      train.append(confident);
      n_pseudo = confident.size();
      loss = train_epoch(model, train, lr, epoch_seed, cfg.train);
    } else {
      loss = train_epoch(model, d, lr, epoch_seed, cfg.train);
    }

    const auto scores = predict(model, d_valid.features);
    const metrics::RankedList ranked(scores, d_valid.labels);
    const double val = cfg.metric == ValidationMetric::kBedroc
                           ? metrics::bedroc(ranked, cfg.bedroc_alpha)
                           : metrics::log_auc(ranked);
    result.history.push_back({ epoch, lr, loss, val, n_pseudo });
    if (val > result.best_bedroc) {
      result.best_bedroc = val;
      result.best_epoch = epoch;
      result.best = model;
    }
  }
  return result;
}

void save_model(std::ostream &os, const LogisticModel &model) {
  char buf[64];
  os << "scaffkit-logistic 1\n";
  os << "radius " << model.config().radius << '\n';
  os << "nbits " << model.config().nbits << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", model.bias());
  os << "bias " << buf << '\n';
  os << "weights";
  for (double w: model.weights()) {
    std::snprintf(buf, sizeof buf, " %.17g", w);
    os << buf;
  }
  os << '\n';
}

LogisticModel load_model(std::istream &is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "scaffkit-logistic" || version != 1)
    throw IoError("not a version 1 logistic checkpoint");
  FeatureConfig cfg;
  double bias = 0.0;
  std::string key;
  if (!(is >> key >> cfg.radius) || key != "radius"
      || !(is >> key >> cfg.nbits) || key != "nbits"
      || !(is >> key >> bias) || key != "bias" || !(is >> key) || key != "weights")
    throw IoError("malformed checkpoint header");
  LogisticModel model(cfg);
  model.bias() = bias;
  for (auto &w: model.weights()) {
    if (!(is >> w))
      throw IoError("checkpoint has fewer weights than nbits");
  }
  return model;
}

void write_history(std::ostream &os, const std::vector<EpochRecord> &history) {
  os << "epoch,loss,val_bedroc,n_pseudo\n";
  char buf[128];
  for (const auto &h: history) {
    std::snprintf(buf, sizeof buf, "%u,%.6f,%.6f,%zu\n", h.epoch, h.loss,
                  h.val_bedroc, h.n_pseudo);
    os << buf;
  }
}

}  // namespace scaffkit::selftrain
