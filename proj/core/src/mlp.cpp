#include "tscopf/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tscopf/textio.hpp"

namespace tscopf {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Softplus: return "softplus";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "softplus") return Activation::Softplus;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "linear") return Activation::Linear;
  throw SemanticError("unknown activation '" + s + "'");
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logit(double c) {
  if (!(c > 0.0 && c < 1.0)) throw SemanticError("logit argument must lie in (0,1)");
  return std::log(c / (1.0 - c));
}

void activation_eval(Activation a, double z, double& v, double& d1, double& d2) {
  switch (a) {
    case Activation::Tanh: {
      v = std::tanh(z);
      d1 = 1.0 - v * v;
      d2 = -2.0 * v * d1;
      return;
    }
    case Activation::Softplus: {
      v = softplus(z);
      d1 = sigmoid(z);
      d2 = d1 * (1.0 - d1);
      return;
    }
    case Activation::Sigmoid: {
      v = sigmoid(z);
      d1 = v * (1.0 - v);
      d2 = d1 * (1.0 - 2.0 * v);
      return;
    }
    case Activation::Linear: {
      v = z;
      d1 = 1.0;
      d2 = 0.0;
      return;
    }
  }
}

void MlpParams::validate() const {
  if (W.empty() || W.size() != b.size() || W.size() != act.size())
    throw SemanticError("mlp: inconsistent layer lists");
  for (size_t k = 0; k < W.size(); ++k) {
    if (W[k].rows() != b[k].size()) throw SemanticError("mlp: bias/weight row mismatch");
    if (k > 0 && W[k].cols() != W[k - 1].rows())
      throw SemanticError("mlp: chained dimensions inconsistent");
  }
  if (W.back().rows() != 1) throw SemanticError("mlp: final layer must have width 1");
  if (act.back() != Activation::Sigmoid)
    throw SemanticError("mlp: final activation must be sigmoid");
}

namespace {

// Forward pass storing pre-activations y[k] and activations x[k].
void run_forward(const MlpParams& p, const Eigen::VectorXd& x0,
                 std::vector<Eigen::VectorXd>& ys, std::vector<Eigen::VectorXd>& xs) {
  const int L = p.num_layers();
  ys.resize(L);
  xs.resize(L);
  const Eigen::VectorXd* in = &x0;
  for (int k = 0; k < L; ++k) {
    ys[k] = p.W[k] * (*in) + p.b[k];
    xs[k].resize(ys[k].size());
    for (int i = 0; i < ys[k].size(); ++i) {
      double v, d1, d2;
      activation_eval(p.act[k], ys[k](i), v, d1, d2);
      xs[k](i) = v;
    }
    in = &xs[k];
  }
}

}  // namespace

double forward(const MlpParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.input_dim()) throw SemanticError("mlp: input dimension mismatch");
  std::vector<Eigen::VectorXd> ys, xs;
  run_forward(p, x, ys, xs);
  return xs.back()(0);
}

Eigen::VectorXd input_gradient(const MlpParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.input_dim()) throw SemanticError("mlp: input dimension mismatch");
  std::vector<Eigen::VectorXd> ys, xs;
  run_forward(p, x, ys, xs);
  const int L = p.num_layers();
  // reverse mode: delta = d f / d y[k]
  Eigen::VectorXd delta(1);
  {
    double v, d1, d2;
    activation_eval(p.act[L - 1], ys[L - 1](0), v, d1, d2);
    delta(0) = d1;
  }
  for (int k = L - 1; k > 0; --k) {
    Eigen::VectorXd dx = p.W[k].transpose() * delta;  // d f / d x[k-1]
    delta.resize(dx.size());
    for (int i = 0; i < dx.size(); ++i) {
      double v, d1, d2;
      activation_eval(p.act[k - 1], ys[k - 1](i), v, d1, d2);
      delta(i) = dx(i) * d1;
    }
  }
  return p.W[0].transpose() * delta;
}

MlpParams train(const std::vector<TrainingSample>& data, const TrainConfig& cfg,
                TrainReport* report) {
  if (data.empty()) throw SemanticError("train: empty dataset");
  const int dim = static_cast<int>(data[0].x.size());
  for (const auto& s : data)
    if (s.x.size() != dim || (s.label != 0 && s.label != 1))
      throw SemanticError("train: inconsistent sample");

  std::mt19937_64 rng(cfg.seed);

  // deterministic shuffled split
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_val = static_cast<int>(std::floor(cfg.validation_fraction * data.size()));
  const int n_train = static_cast<int>(data.size()) - n_val;
  if (n_train < 1) throw SemanticError("train: no training samples after split");
  std::vector<int> train_idx(order.begin(), order.begin() + n_train);
  std::vector<int> val_idx(order.begin() + n_train, order.end());

  long pos = 0;
  for (int i : train_idx) pos += data[i].label;
  if (pos == 0 || pos == n_train)
    throw SemanticError("train: training split contains a single class; need both labels");
  // inverse-frequency class weights, mean-one over the training split
  double w1 = n_train / (2.0 * pos);
  double w0 = n_train / (2.0 * (n_train - pos));

  // architecture: hidden layers tanh, softplus, ... cycling, sigmoid head
  MlpParams p;
  std::vector<int> widths = cfg.hidden;
  widths.push_back(1);
  int fan_in = dim;
  for (size_t k = 0; k < widths.size(); ++k) {
    double s = std::sqrt(6.0 / (fan_in + widths[k]));
    std::uniform_real_distribution<double> u(-s, s);
    Eigen::MatrixXd W(widths[k], fan_in);
    for (int i = 0; i < W.rows(); ++i)
      for (int j = 0; j < W.cols(); ++j) W(i, j) = u(rng);
    p.W.push_back(W);
    p.b.push_back(Eigen::VectorXd::Zero(widths[k]));
    if (k + 1 == widths.size())
      p.act.push_back(Activation::Sigmoid);
    else
      p.act.push_back(k % 2 == 0 ? Activation::Tanh : Activation::Softplus);
    fan_in = widths[k];
  }
  p.validate();

  const int L = p.num_layers();
  auto sample_weight = [&](int label) { return label ? w1 : w0; };

  auto mean_loss = [&](const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    double acc = 0.0, wsum = 0.0;
    for (int i : idx) {
      double f = forward(p, data[i].x);
      f = std::clamp(f, 1e-12, 1.0 - 1e-12);
      double w = sample_weight(data[i].label);
      acc -= w * (data[i].label ? std::log(f) : std::log(1.0 - f));
      wsum += w;
    }
    return acc / wsum;
  };

  std::vector<Eigen::MatrixXd> vW(L);
  std::vector<Eigen::VectorXd> vb(L);
  for (int k = 0; k < L; ++k) {
    vW[k] = Eigen::MatrixXd::Zero(p.W[k].rows(), p.W[k].cols());
    vb[k] = Eigen::VectorXd::Zero(p.b[k].size());
  }

  double lr = cfg.learning_rate;
  double best_val = std::numeric_limits<double>::infinity();
  MlpParams best = p;
  int since_best = 0, since_halve = 0, epochs = 0;
  double initial_train = mean_loss(train_idx);

  std::vector<Eigen::VectorXd> ys, xs;
  std::vector<Eigen::MatrixXd> gW(L);
  std::vector<Eigen::VectorXd> gb(L);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    ++epochs;
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    for (int start = 0; start < n_train; start += cfg.batch_size) {
      int end = std::min(start + cfg.batch_size, n_train);
      for (int k = 0; k < L; ++k) {
        gW[k].setZero(p.W[k].rows(), p.W[k].cols());
        gb[k].setZero(p.b[k].size());
      }
      double wsum = 0.0;
      for (int s = start; s < end; ++s) {
        const auto& smp = data[train_idx[s]];
        run_forward(p, smp.x, ys, xs);
        double f = xs.back()(0);
        double w = sample_weight(smp.label);
        wsum += w;
        // BCE with sigmoid head: dL/dy_last = (f - label)
        Eigen::VectorXd delta(1);
        delta(0) = w * (f - smp.label);
        for (int k = L - 1; k >= 0; --k) {
          const Eigen::VectorXd& input = k == 0 ? smp.x : xs[k - 1];
          gW[k].noalias() += delta * input.transpose();
          gb[k] += delta;
          if (k == 0) break;
          Eigen::VectorXd dx = p.W[k].transpose() * delta;
          delta.resize(dx.size());
          for (int i = 0; i < dx.size(); ++i) {
            double v, d1, d2;
            activation_eval(p.act[k - 1], ys[k - 1](i), v, d1, d2);
            delta(i) = dx(i) * d1;
          }
        }
      }
      for (int k = 0; k < L; ++k) {
        vW[k] = cfg.momentum * vW[k] - (lr / wsum) * gW[k];
        vb[k] = cfg.momentum * vb[k] - (lr / wsum) * gb[k];
        p.W[k] += vW[k];
        p.b[k] += vb[k];
      }
    }
    double val = val_idx.empty() ? mean_loss(train_idx) : mean_loss(val_idx);
    if (val < best_val - 1e-6) {
      best_val = val;
      best = p;
      since_best = 0;
      since_halve = 0;
    } else {
      ++since_best;
      ++since_halve;
      if (since_halve >= cfg.plateau_epochs) {
        lr *= 0.5;
        since_halve = 0;
      }
      if (since_best >= cfg.patience_epochs) break;
    }
  }
  p = best;

  if (report) {
    report->initial_train_loss = initial_train;
    report->final_train_loss = mean_loss(train_idx);
    report->best_validation_loss = best_val;
    report->epochs_run = epochs;
    const std::vector<int>& eval_idx = val_idx.empty() ? train_idx : val_idx;
    int correct = 0;
    for (int i : eval_idx) correct += (forward(p, data[i].x) >= 0.5 ? 1 : 0) == data[i].label;
    report->validation_accuracy = static_cast<double>(correct) / eval_idx.size();
  }
  return p;
}

}  // namespace tscopf
