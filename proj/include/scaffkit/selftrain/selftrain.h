//
// scaffkit - scaffold-aware virtual screening toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFKIT_SELFTRAIN_SELFTRAIN_H_
#define SCAFFKIT_SELFTRAIN_SELFTRAIN_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "scaffkit/chem/mol_graph.h"
#include "scaffkit/fingerprint/fingerprint.h"

namespace scaffkit::selftrain {

enum class Origin : std::uint8_t { kOriginal, kPseudo };

struct FeatureConfig {
  std::uint32_t radius = fp::kDefaultRadius;
  std::uint32_t nbits = fp::kDefaultBits;

  bool operator==(const FeatureConfig &) const = default;
};

// Training examples, featurized once.
struct LabeledSet {
  std::vector<fp::Fingerprint> features;
  std::vector<int> labels;
  std::vector<Origin> origin;

  std::size_t size() const { return labels.size(); }
  std::size_t actives() const;
  double active_fraction() const;
  void add(fp::Fingerprint f, int label, Origin o);
  void append(const LabeledSet &other);

  static LabeledSet from_molecules(std::span<const chem::MolGraph> mols,
                                   std::span<const int> labels, Origin origin,
                                   const FeatureConfig &cfg = {});
};

// Anything that scores a fingerprint with a logit.
class Predictor {
public:
  virtual ~Predictor() = default;
  virtual double score(const fp::Fingerprint &f) const = 0;
};

double sigmoid(double z);

// Logistic regression on fingerprint bits; the bias is not penalized.
class LogisticModel: public Predictor {
public:
  explicit LogisticModel(FeatureConfig cfg = {});

  double score(const fp::Fingerprint &f) const override;

  const FeatureConfig &config() const { return cfg_; }
  std::vector<double> &weights() { return weights_; }
  const std::vector<double> &weights() const { return weights_; }
  double &bias() { return bias_; }
  double bias() const { return bias_; }

  bool operator==(const LogisticModel &o) const {
    return cfg_ == o.cfg_ && bias_ == o.bias_ && weights_ == o.weights_;
  }

private:
  FeatureConfig cfg_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

inline constexpr double kDefaultL2 = 1e-4;

// Mean binary cross-entropy over the examples plus 0.5 * l2 * |w|^2.
// gradient (resized to nbits + 1, bias last) receives d loss / d params.
double loss_and_gradient(const LogisticModel &model,
                         std::span<const fp::Fingerprint> features,
                         std::span<const int> labels, double l2,
                         std::vector<double> *gradient = nullptr);

double dataset_loss(const LogisticModel &model, const LabeledSet &data,
                    double l2 = kDefaultL2);

struct TrainOptions {
  std::size_t batch_size = 128;
  double l2 = kDefaultL2;
};

// One epoch of minibatch gradient descent. The minority class is drawn with
// replacement until both classes are equally represented, then the epoch
// order is shuffled. Returns the mean minibatch loss. Throws DegenerateData
// when a class is missing.
double train_epoch(LogisticModel &model, const LabeledSet &data, double lr,
                   std::uint64_t seed, const TrainOptions &opts = {});

std::vector<double> predict(const Predictor &model,
                            std::span<const fp::Fingerprint> features);

struct PseudoLabels {
  LabeledSet set;
  // Positions in the candidate list of the kept molecules.
  std::vector<std::size_t> kept;
};

// Keeps the candidates with sigmoid(score) > tau, all labeled active.
PseudoLabels pseudo_label(const Predictor &model,
                          std::span<const fp::Fingerprint> candidates, double tau);

// Score used to pick the best epoch.
enum class ValidationMetric { kBedroc, kLogAuc };

struct SelfTrainConfig {
  std::uint32_t e_start = 20;
  std::uint32_t e_freq = 5;
  double tau = 0.9;
  std::uint32_t epochs = 100;
  double lr = 0.1;
  double lr_power = 0.9;
  std::uint64_t seed = 0;
  TrainOptions train;
  ValidationMetric metric = ValidationMetric::kBedroc;
  double bedroc_alpha = 20.0;

  // Throws ConfigError unless 0 < e_start < epochs, e_freq >= 1 and
  // tau in (0.5, 1).
  void validate() const;
};

struct EpochRecord {
  std::uint32_t epoch;
  double lr;
  double loss;
  double val_bedroc;
  std::size_t n_pseudo;
};

struct SelfTrainResult {
  LogisticModel best;
  std::uint32_t best_epoch = 0;
  double best_bedroc = 0.0;
  LogisticModel last;
  std::vector<EpochRecord> history;
};

// lr0 * (1 - epoch / epochs)^power
double poly_lr(const SelfTrainConfig &cfg, std::uint32_t epoch);

// Warm-up on d for e_start epochs; from then on, every e_freq epochs the
// confident part of d_prime is re-selected and training runs on the union.
// The model with the best validation score (strictly better than all
// earlier epochs) is returned; the history column keeps the name
// val_bedroc whichever metric is configured. An empty d_prime gives plain
// training.
SelfTrainResult self_train(const LabeledSet &d,
                           std::span<const fp::Fingerprint> d_prime,
                           const LabeledSet &d_valid, const SelfTrainConfig &cfg,
                           FeatureConfig features = {});

// Text checkpoint: feature config, bias and weights at full precision.
void save_model(std::ostream &os, const LogisticModel &model);
LogisticModel load_model(std::istream &is);

// CSV: epoch,loss,val_bedroc,n_pseudo
void write_history(std::ostream &os, const std::vector<EpochRecord> &history);

}  // namespace scaffkit::selftrain

#endif  // SCAFFKIT_SELFTRAIN_SELFTRAIN_H_
