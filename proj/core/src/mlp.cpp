#include "maskguard/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "maskguard/error.hpp"

namespace maskguard {

namespace {

constexpr char kMagic[8] = {'M', 'G', 'M', 'L', 'P', 'B', 'I', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double mx = z.col(c).maxCoeff();
    p.col(c) = (z.col(c).array() - mx).exp();
    p.col(c) /= p.col(c).sum();
  }
  return p;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated model file");
  return v;
}

void write_doubles(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* p, std::size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw FormatError("truncated model file");
}

// Per-sample weights normalized so they sum to one.
Eigen::VectorXd sample_weights(std::span<const int> y, std::array<double, 2> cw) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) w(static_cast<Eigen::Index>(i)) = cw[y[i] == 1 ? 1 : 0];
  const double total = w.sum();
  if (total > 0.0) w /= total;
  return w;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(
    std::span<const int> y, double fraction, std::mt19937_64& rng) {
  std::vector<std::size_t> fit, hold;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_hold = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_hold = std::clamp<std::size_t>(n_hold, 1, idx.size() - 1);
    else n_hold = 0;
    hold.insert(hold.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_hold));
    fit.insert(fit.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_hold), idx.end());
  }
  std::sort(fit.begin(), fit.end());
  std::sort(hold.begin(), hold.end());
  return {fit, hold};
}

}  // namespace

std::array<std::size_t, 2> Dataset::class_counts() const {
  std::array<std::size_t, 2> c{};
  for (int v : y) ++c[v == 1 ? 1 : 0];
  return c;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  d.y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    d.x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
    d.y.push_back(y[rows[r]]);
  }
  return d;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x, std::size_t snapshots) {
  if (snapshots == 0 || x.cols() % static_cast<Eigen::Index>(snapshots) != 0) {
    throw InvalidConfig("feature width is not divisible by the snapshot count");
  }
  if (x.rows() == 0) throw InsufficientData("cannot fit a standardizer on zero rows");
  const Eigen::Index width = x.cols() / static_cast<Eigen::Index>(snapshots);
  Standardizer s;
  s.mean.resize(x.cols());
  s.scale.resize(x.cols());
  for (Eigen::Index q = 0; q < width; ++q) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t b = 0; b < snapshots; ++b) {
      const auto col = x.col(q + static_cast<Eigen::Index>(b) * width);
      sum += col.sum();
    }
    const double n = static_cast<double>(x.rows()) * static_cast<double>(snapshots);
    const double mu = sum / n;
    for (std::size_t b = 0; b < snapshots; ++b) {
      const auto col = x.col(q + static_cast<Eigen::Index>(b) * width);
      sq += (col.array() - mu).square().sum();
    }
    double sd = std::sqrt(sq / n);
    if (!(sd > 1e-12)) sd = 1.0;
    for (std::size_t b = 0; b < snapshots; ++b) {
      s.mean(q + static_cast<Eigen::Index>(b) * width) = mu;
      s.scale(q + static_cast<Eigen::Index>(b) * width) = sd;
    }
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (mean.size() == 0) return x;
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

void TrainConfig::validate() const {
  if (hidden.empty()) throw InvalidConfig("at least one hidden layer is required");
  for (auto h : hidden) {
    if (h == 0) throw InvalidConfig("hidden layer widths must be positive");
  }
  if (!(l2_lambda >= 0.0)) throw InvalidConfig("l2_lambda must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidConfig("learning rate must be positive");
  if (!(lr_decay >= 0.0)) throw InvalidConfig("lr_decay must be >= 0");
  if (!(class_weight[0] > 0.0 && class_weight[1] > 0.0)) {
    throw InvalidConfig("class weights must be positive");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw InvalidConfig("validation_fraction must lie in [0, 1)");
  }
  if (k_folds < 2) throw InvalidConfig("k_folds must be >= 2");
  if (snapshots == 0) throw InvalidConfig("snapshots must be positive");
}

MlpModel::MlpModel(std::vector<std::size_t> layers, double l2_lambda, std::uint64_t seed,
                   std::array<double, 2> prior)
    : layers_(std::move(layers)), l2_(l2_lambda) {
  if (layers_.size() < 2 || layers_.back() != 2) {
    throw InvalidConfig("network needs an input layer and a 2-unit output layer");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = layers_.size() - 1;
  for (std::size_t l = 0; l < n; ++l) {
    const auto in = static_cast<Eigen::Index>(layers_[l]);
    const auto out = static_cast<Eigen::Index>(layers_[l + 1]);
    const bool last = l + 1 == n;
    // He init for ReLU layers; a near-zero output layer keeps the initial softmax at the prior.
    const double sd = last ? 0.01 / std::sqrt(static_cast<double>(in))
                           : std::sqrt(2.0 / static_cast<double>(in));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index c = 0; c < in; ++c) {
      for (Eigen::Index r = 0; r < out; ++r) w(r, c) = gauss(rng) * sd;
    }
    w_.push_back(std::move(w));
    b_.push_back(Eigen::VectorXd::Zero(out));
  }
  const double total = prior[0] + prior[1];
  if (total > 0.0 && prior[0] > 0.0 && prior[1] > 0.0) {
    b_.back()(0) = std::log(prior[0] / total);
    b_.back()(1) = std::log(prior[1] / total);
  }
}

Eigen::MatrixXd MlpModel::probabilities(const Eigen::MatrixXd& xs) const {
  Eigen::MatrixXd a = xs.transpose();
  for (std::size_t l = 0; l < w_.size(); ++l) {
    Eigen::MatrixXd z = w_[l] * a;
    z.colwise() += b_[l];
    a = l + 1 == w_.size() ? softmax_columns(z) : relu(z);
  }
  return a.transpose();
}

Prediction MlpModel::predict(std::span<const double> features) const {
  if (features.size() != layers_.front()) throw InvalidConfig("feature width mismatch");
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = features[i];
  const Eigen::MatrixXd p = probabilities(std_.apply(x));
  Prediction out;
  out.probability = {p(0, 0), p(0, 1)};
  out.label = p(0, 1) > p(0, 0) ? 1 : 0;
  return out;
}

double MlpModel::loss(const Eigen::MatrixXd& xs, std::span<const int> y,
                      std::array<double, 2> class_weight, bool include_l2) const {
  const Eigen::MatrixXd p = probabilities(xs);
  const Eigen::VectorXd sw = sample_weights(y, class_weight);
  double ce = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    ce -= sw(r) * std::log(std::max(p(r, y[i] == 1 ? 1 : 0), 1e-300));
  }
  if (include_l2) {
    for (const auto& w : w_) ce += l2_ * w.squaredNorm();
  }
  return ce;
}

Gradients MlpModel::gradient(const Eigen::MatrixXd& xs, std::span<const int> y,
                             std::array<double, 2> class_weight, double* loss_out) const {
  const std::size_t n = w_.size();
  std::vector<Eigen::MatrixXd> acts;  // activations, units x batch
  std::vector<Eigen::MatrixXd> pre;
  acts.push_back(xs.transpose());
  for (std::size_t l = 0; l < n; ++l) {
    Eigen::MatrixXd z = w_[l] * acts.back();
    z.colwise() += b_[l];
    pre.push_back(z);
    acts.push_back(l + 1 == n ? softmax_columns(z) : relu(z));
  }
  const Eigen::VectorXd sw = sample_weights(y, class_weight);
  const Eigen::MatrixXd& p = acts.back();
  Eigen::MatrixXd delta = p;
  double ce = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    const int t = y[i] == 1 ? 1 : 0;
    ce -= sw(c) * std::log(std::max(p(t, c), 1e-300));
    delta(t, c) -= 1.0;
    delta.col(c) *= sw(c);
  }
  Gradients g;
  g.w.resize(n);
  g.b.resize(n);
  for (std::size_t l = n; l-- > 0;) {
    g.w[l] = delta * acts[l].transpose() + 2.0 * l2_ * w_[l];
    g.b[l] = delta.rowwise().sum();
    ce += l2_ * w_[l].squaredNorm();
    if (l > 0) {
      delta = (w_[l].transpose() * delta).cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  if (loss_out) *loss_out = ce;
  return g;
}

bool MlpModel::is_finite() const {
  for (const auto& w : w_) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : b_) {
    if (!b.allFinite()) return false;
  }
  return std_.mean.allFinite() && std_.scale.allFinite();
}

void MlpModel::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint32_t>(layers_.size()));
  for (auto s : layers_) write_pod(out, static_cast<std::uint32_t>(s));
  write_pod(out, l2_);
  const auto dim = static_cast<std::uint32_t>(std_.mean.size());
  write_pod(out, dim);
  write_doubles(out, std_.mean.data(), dim);
  write_doubles(out, std_.scale.data(), dim);
  for (std::size_t l = 0; l < w_.size(); ++l) {
    write_doubles(out, w_[l].data(), static_cast<std::size_t>(w_[l].size()));
    write_doubles(out, b_[l].data(), static_cast<std::size_t>(b_[l].size()));
  }
  if (!out) throw FormatError("failed to write model");
}

MlpModel MlpModel::load(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw FormatError("not a model file");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  const auto n_layers = read_pod<std::uint32_t>(in);
  if (n_layers < 2 || n_layers > 16) throw FormatError("bad layer count");
  MlpModel m;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto s = read_pod<std::uint32_t>(in);
    if (s == 0 || s > 100000) throw FormatError("bad layer width");
    m.layers_.push_back(s);
  }
  if (m.layers_.back() != 2) throw FormatError("output layer must have 2 units");
  m.l2_ = read_pod<double>(in);
  const auto dim = read_pod<std::uint32_t>(in);
  if (dim != 0 && dim != m.layers_.front()) throw FormatError("standardizer width mismatch");
  m.std_.mean.resize(dim);
  m.std_.scale.resize(dim);
  read_doubles(in, m.std_.mean.data(), dim);
  read_doubles(in, m.std_.scale.data(), dim);
  for (std::size_t l = 0; l + 1 < m.layers_.size(); ++l) {
    Eigen::MatrixXd w(static_cast<Eigen::Index>(m.layers_[l + 1]),
                      static_cast<Eigen::Index>(m.layers_[l]));
    Eigen::VectorXd b(static_cast<Eigen::Index>(m.layers_[l + 1]));
    read_doubles(in, w.data(), static_cast<std::size_t>(w.size()));
    read_doubles(in, b.data(), static_cast<std::size_t>(b.size()));
    m.w_.push_back(std::move(w));
    m.b_.push_back(std::move(b));
  }
  if (!m.is_finite()) throw FormatError("model contains non-finite parameters");
  return m;
}

namespace {

double standardized_weighted_error(const MlpModel& m, const Eigen::MatrixXd& xs,
                                   std::span<const int> y, std::array<double, 2> w) {
  const Eigen::MatrixXd p = m.probabilities(xs);
  double wrong = 0.0, total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const int label = p(r, 1) > p(r, 0) ? 1 : 0;
    const double wi = w[static_cast<std::size_t>(y[i])];
    total += wi;
    if (label != y[i]) wrong += wi;
  }
  return total > 0.0 ? wrong / total : 0.0;
}

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  const auto counts = data.class_counts();
  if (counts[0] == 0 || counts[1] == 0) throw InsufficientData("training data needs both classes");
  if (data.x.rows() != static_cast<Eigen::Index>(data.y.size())) {
    throw InvalidConfig("feature/label count mismatch");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> fit_rows(data.size()), val_rows;
  std::iota(fit_rows.begin(), fit_rows.end(), std::size_t{0});
  if (cfg.validation_fraction > 0.0) {
    std::tie(fit_rows, val_rows) = stratified_holdout(data.y, cfg.validation_fraction, rng);
  }
  const Dataset fit = data.subset(fit_rows);
  const Dataset val = data.subset(val_rows);

  std::vector<std::size_t> layers;
  layers.push_back(static_cast<std::size_t>(data.x.cols()));
  layers.insert(layers.end(), cfg.hidden.begin(), cfg.hidden.end());
  layers.push_back(2);
  const auto fit_counts = fit.class_counts();
  const std::array<double, 2> prior = {cfg.class_weight[0] * static_cast<double>(fit_counts[0]),
                                       cfg.class_weight[1] * static_cast<double>(fit_counts[1])};
  MlpModel model(layers, cfg.l2_lambda, rng(), prior);
  model.standardizer() = Standardizer::fit(fit.x, cfg.snapshots);
  const Eigen::MatrixXd xs = model.standardizer().apply(fit.x);
  const Eigen::MatrixXd xv = val.size() ? model.standardizer().apply(val.x) : Eigen::MatrixXd();

  const Eigen::MatrixXd& xe = val.size() ? xv : xs;
  const std::vector<int>& ye = val.size() ? val.y : fit.y;
  auto evaluate = [&](const MlpModel& m) {
    return std::pair{m.loss(xe, ye, cfg.class_weight, false),
                     standardized_weighted_error(m, xe, ye, cfg.class_weight)};
  };
  auto better = [&](std::pair<double, double> a, std::pair<double, double> b) {
    if (cfg.selection == TrainConfig::Selection::Loss) return a.first < b.first;
    return a.second < b.second || (a.second == b.second && a.first < b.first);
  };

  TrainResult result;
  result.model = model;
  auto best = evaluate(model);
  result.history.push_back({0, model.loss(xs, fit.y, cfg.class_weight), best.first, best.second});

  const std::size_t n_layers = model.weights().size();
  std::vector<Eigen::MatrixXd> mw(n_layers), vw(n_layers);
  std::vector<Eigen::VectorXd> mb(n_layers), vb(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    mw[l] = Eigen::MatrixXd::Zero(model.weights()[l].rows(), model.weights()[l].cols());
    vw[l] = mw[l];
    mb[l] = Eigen::VectorXd::Zero(model.biases()[l].size());
    vb[l] = mb[l];
  }
  const std::size_t n = fit.size();
  const std::size_t batch = cfg.batch_size == 0 || cfg.batch_size >= n ? n : cfg.batch_size;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.learning_rate / (1.0 + cfg.lr_decay * static_cast<double>(epoch - 1));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      Eigen::MatrixXd xb;
      std::vector<int> yb;
      if (len == n && batch == n) {
        xb = xs;
        yb = fit.y;
      } else {
        xb.resize(static_cast<Eigen::Index>(len), xs.cols());
        yb.resize(len);
        for (std::size_t r = 0; r < len; ++r) {
          xb.row(static_cast<Eigen::Index>(r)) = xs.row(static_cast<Eigen::Index>(order[start + r]));
          yb[r] = fit.y[order[start + r]];
        }
      }
      double batch_loss = 0.0;
      const Gradients g = model.gradient(xb, yb, cfg.class_weight, &batch_loss);
      if (!std::isfinite(batch_loss)) {
        throw NonFiniteLoss("non-finite training loss at epoch " + std::to_string(epoch) +
                            " (lr=" + std::to_string(lr) + ", batch start " +
                            std::to_string(start) + ")");
      }
      epoch_loss += batch_loss * static_cast<double>(len) / static_cast<double>(n);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < n_layers; ++l) {
        mw[l] = cfg.beta1 * mw[l] + (1.0 - cfg.beta1) * g.w[l];
        vw[l] = cfg.beta2 * vw[l] + (1.0 - cfg.beta2) * g.w[l].cwiseAbs2();
        mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * g.b[l];
        vb[l] = cfg.beta2 * vb[l] + (1.0 - cfg.beta2) * g.b[l].cwiseAbs2();
        model.weights()[l].array() -=
            lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + cfg.adam_eps);
        model.biases()[l].array() -=
            lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + cfg.adam_eps);
      }
    }
    const auto v = evaluate(model);
    if (!std::isfinite(v.first)) {
      throw NonFiniteLoss("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back({epoch, epoch_loss, v.first, v.second});
    if (better(v, best)) {
      best = v;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

double weighted_error(const MlpModel& model, const Dataset& data,
                      std::array<double, 2> class_weight) {
  if (data.size() == 0) return 0.0;
  return standardized_weighted_error(model, model.standardizer().apply(data.x), data.y,
                                     class_weight);
}

double accuracy(const MlpModel& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  const Eigen::MatrixXd p = model.probabilities(model.standardizer().apply(data.x));
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const int label = p(r, 1) > p(r, 0) ? 1 : 0;
    ok += label == data.y[i] ? 1 : 0;
  }
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

std::vector<std::size_t> assign_folds(std::span<const int> y, std::size_t k) {
  if (k < 2) throw InvalidConfig("k must be >= 2");
  std::vector<std::size_t> fold(y.size());
  std::size_t next = 0;
  for (int cls : {0, 1}) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      if ((y[i] == 1 ? 1 : 0) == cls) fold[i] = next++ % k;
    }
  }
  return fold;
}

KFoldReport kfold_evaluate(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.k_folds;
  const auto fold = assign_folds(data.y, k);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < fold.size(); ++i) members[fold[i]].push_back(i);
  for (std::size_t f = 0; f < k; ++f) {
    std::array<bool, 2> seen{};
    for (auto i : members[f]) seen[data.y[i] == 1 ? 1 : 0] = true;
    if (!seen[0] || !seen[1]) {
      throw InsufficientData("fold " + std::to_string(f) + " lacks a class");
    }
  }
  KFoldReport rep;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      if (fold[i] != f) rest.push_back(i);
    }
    const TrainResult tr = train(data.subset(rest), cfg);
    rep.fold_accuracy.push_back(accuracy(tr.model, data.subset(members[f])));
    rep.fold_size.push_back(members[f].size());
  }
  const double kd = static_cast<double>(k);
  rep.mean_accuracy = std::accumulate(rep.fold_accuracy.begin(), rep.fold_accuracy.end(), 0.0) / kd;
  double var = 0.0;
  for (double a : rep.fold_accuracy) var += (a - rep.mean_accuracy) * (a - rep.mean_accuracy);
  rep.std_accuracy = std::sqrt(var / kd);
  return rep;
}

}  // namespace maskguard
