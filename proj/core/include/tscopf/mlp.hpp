#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace tscopf {

enum class Activation { Tanh, Softplus, Sigmoid, Linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Value and first/second derivative of an activation at z.
void activation_eval(Activation a, double z, double& v, double& d1, double& d2);

double sigmoid(double z);
double softplus(double z);  // overflow-safe: max(z,0) + log1p(exp(-|z|))
double logit(double c);

/// Fully connected feedforward classifier. Layer k maps width[k-1] ->
/// width[k] via y = W x + b followed by the layer's activation. The last
/// layer has width 1 and a sigmoid, so forward() lands in (0,1).
struct MlpParams {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  std::vector<Activation> act;

  int num_layers() const { return static_cast<int>(W.size()); }
  int input_dim() const { return W.empty() ? 0 : static_cast<int>(W[0].cols()); }
  void validate() const;  // throws SemanticError on inconsistent shapes
};

double forward(const MlpParams& p, const Eigen::VectorXd& x);
Eigen::VectorXd input_gradient(const MlpParams& p, const Eigen::VectorXd& x);

struct TrainingSample {
  Eigen::VectorXd x;
  int label = 0;       // 0 unstable, 1 stable
  int iteration = 0;   // sampling iteration that produced it
  long sample_id = 0;  // draw id within the iteration
};

struct TrainConfig {
  std::vector<int> hidden = {128, 128};  // tanh then softplus by default
  int batch_size = 64;
  double validation_fraction = 0.2;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int max_epochs = 200;
  int plateau_epochs = 5;   // halve the learning rate after this many stalls
  int patience_epochs = 20;  // stop after this many epochs without val improvement
  std::uint64_t seed = 0;
};

struct TrainReport {
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  double best_validation_loss = 0.0;
  double validation_accuracy = 0.0;
  int epochs_run = 0;
};

/// SGD with momentum on weighted binary cross-entropy. Deterministic for a
/// fixed seed. Throws SemanticError when the training split is single-class.
MlpParams train(const std::vector<TrainingSample>& data, const TrainConfig& cfg,
                TrainReport* report = nullptr);

}  // namespace tscopf
