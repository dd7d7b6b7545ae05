#pragma once

#include "tscopf/acopf.hpp"
#include "tscopf/mlp.hpp"
#include "tscopf/network.hpp"

namespace tscopf {

/// Which dispatch quantities feed the stability classifier.
///   A: (g, d, r, l)   generator setpoints plus full load
///   B: (g, d)         real power only
///   C: (p)            net real injection per bus
///   D: (p, Zh)        injections plus zonal reserve totals
enum class FeatureVariant { A, B, C, D };

std::string to_string(FeatureVariant v);
FeatureVariant feature_variant_from_string(const std::string& s);

struct FeatureSpec {
  FeatureVariant variant = FeatureVariant::B;
  int n = 0, m = 0, z = 0;  // case sizes the layout was built for
  // per-feature affine normalization: normalized = (raw - mean) / stdev.
  // Empty vectors mean the identity map (not yet fitted).
  Eigen::VectorXd mean, stdev;

  int dim() const;
  bool normalized() const { return mean.size() == dim(); }

  static FeatureSpec for_case(const NetworkCase& c, FeatureVariant v);
};

/// Raw (unnormalized) feature vector for a dispatch under a given load.
/// Net injection uses p = M g - d, which coincides with the network
/// injection at any balanced point and stays affine in the decision
/// variables for constraint embedding.
Eigen::VectorXd extract_raw_features(const NetworkCase& c, const DispatchSolution& s,
                                     const Eigen::VectorXd& d_pu, const Eigen::VectorXd& l_pu,
                                     const FeatureSpec& spec);

/// Raw features then the spec's normalization (identity if not fitted).
Eigen::VectorXd extract_features(const NetworkCase& c, const DispatchSolution& s,
                                 const Eigen::VectorXd& d_pu, const Eigen::VectorXd& l_pu,
                                 const FeatureSpec& spec);

Eigen::VectorXd normalize_features(const FeatureSpec& spec, const Eigen::VectorXd& raw);
Eigen::VectorXd denormalize_features(const FeatureSpec& spec, const Eigen::VectorXd& x);

/// Zero-mean/unit-variance constants from a batch of raw vectors. Features
/// with (near) zero spread get stdev 1 so they pass through unscaled.
void fit_normalization(FeatureSpec& spec, const std::vector<Eigen::VectorXd>& raw);

/// Classifier weights plus the feature layout they were trained on;
/// serializes to one self-contained text file.
struct SurrogateModel {
  MlpParams params;
  FeatureSpec spec;
};

std::string serialize_surrogate(const SurrogateModel& s);
SurrogateModel parse_surrogate(const std::string& text);

}  // namespace tscopf
