#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace maskguard {

// Rows are samples. Label 1 = internal (masked) fault, 0 = external disturbance.
struct Dataset {
  Eigen::MatrixXd x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  std::array<std::size_t, 2> class_counts() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

// z-score with statistics shared across `snapshots` equal-width blocks of the input.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x, std::size_t snapshots);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct TrainConfig {
  std::vector<std::size_t> hidden = {310, 90};
  double l2_lambda = 9.8838e-7;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;  // 0 = full batch
  double learning_rate = 1e-3;
  double lr_decay = 0.01;  // lr / (1 + decay * epoch)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::array<double, 2> class_weight = {10.0, 1.0};  // {negative, positive}
  double validation_fraction = 0.15;
  std::size_t k_folds = 10;
  std::size_t snapshots = 2;  // standardizer pooling blocks
  // Checkpoint choice: lowest validation loss, or lowest cost-weighted validation error
  // with the loss as tie-break.
  enum class Selection { Loss, WeightedError };
  Selection selection = Selection::WeightedError;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Prediction {
  int label = 0;
  std::array<double, 2> probability{};
};

struct Gradients {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

class MlpModel {
 public:
  MlpModel() = default;
  // Random initialization; `prior` sets the output bias to log class priors.
  MlpModel(std::vector<std::size_t> layers, double l2_lambda, std::uint64_t seed,
           std::array<double, 2> prior = {0.5, 0.5});

  const std::vector<std::size_t>& layers() const { return layers_; }
  double l2_lambda() const { return l2_; }
  std::vector<Eigen::MatrixXd>& weights() { return w_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }
  Standardizer& standardizer() { return std_; }
  const Standardizer& standardizer() const { return std_; }

  // Raw (unstandardized) features.
  Prediction predict(std::span<const double> features) const;
  // Standardized inputs, one sample per row; returns probabilities, one sample per row.
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& xs) const;
  // Weighted cross-entropy (normalized by the weight sum) plus l2 * sum ||W||^2.
  double loss(const Eigen::MatrixXd& xs, std::span<const int> y,
              std::array<double, 2> class_weight, bool include_l2 = true) const;
  Gradients gradient(const Eigen::MatrixXd& xs, std::span<const int> y,
                     std::array<double, 2> class_weight, double* loss_out = nullptr) const;

  bool is_finite() const;
  void save(std::ostream& out) const;
  static MlpModel load(std::istream& in);

 private:
  std::vector<std::size_t> layers_;
  double l2_ = 0.0;
  std::vector<Eigen::MatrixXd> w_;  // out x in
  std::vector<Eigen::VectorXd> b_;
  Standardizer std_;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_error = 0.0;  // class-weighted misclassification fraction
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
};

TrainResult train(const Dataset& data, const TrainConfig& cfg);

struct KFoldReport {
  std::vector<double> fold_accuracy;
  std::vector<std::size_t> fold_size;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

// Stratified round-robin fold assignment in input order.
std::vector<std::size_t> assign_folds(std::span<const int> y, std::size_t k);
KFoldReport kfold_evaluate(const Dataset& data, const TrainConfig& cfg);

double accuracy(const MlpModel& model, const Dataset& data);
// Misclassified class weight over total class weight, on raw features.
double weighted_error(const MlpModel& model, const Dataset& data,
                      std::array<double, 2> class_weight);

}  // namespace maskguard
