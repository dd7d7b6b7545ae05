#include "tscopf/features.hpp"

#include <cmath>
#include <sstream>

#include "tscopf/textio.hpp"

namespace tscopf {

std::string to_string(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::A: return "A";
    case FeatureVariant::B: return "B";
    case FeatureVariant::C: return "C";
    case FeatureVariant::D: return "D";
  }
  return "?";
}

FeatureVariant feature_variant_from_string(const std::string& s) {
  if (s == "A") return FeatureVariant::A;
  if (s == "B") return FeatureVariant::B;
  if (s == "C") return FeatureVariant::C;
  if (s == "D") return FeatureVariant::D;
  throw SemanticError("unknown feature variant '" + s + "'");
}

int FeatureSpec::dim() const {
  switch (variant) {
    case FeatureVariant::A: return 2 * m + 2 * n;  // g, d, r, l
    case FeatureVariant::B: return m + n;          // g, d
    case FeatureVariant::C: return n;              // p
    case FeatureVariant::D: return n + z;          // p, Zh
  }
  return 0;
}

FeatureSpec FeatureSpec::for_case(const NetworkCase& c, FeatureVariant v) {
  FeatureSpec s;
  s.variant = v;
  s.n = c.n();
  s.m = c.m();
  s.z = c.num_zones();
  return s;
}

Eigen::VectorXd extract_raw_features(const NetworkCase& c, const DispatchSolution& s,
                                     const Eigen::VectorXd& d_pu, const Eigen::VectorXd& l_pu,
                                     const FeatureSpec& spec) {
  if (spec.n != c.n() || spec.m != c.m() || spec.z != c.num_zones())
    throw SemanticError("feature spec was built for a different case");
  const int n = spec.n, m = spec.m;
  Eigen::VectorXd out(spec.dim());
  switch (spec.variant) {
    case FeatureVariant::A:
      out << s.g, d_pu, s.r, l_pu;
      break;
    case FeatureVariant::B:
      out << s.g, d_pu;
      break;
    case FeatureVariant::C:
      out = c.M() * s.g - d_pu;
      break;
    case FeatureVariant::D: {
      if (s.h.size() != m)
        throw SemanticError("feature variant D needs reserve values in the dispatch");
      out.head(n) = c.M() * s.g - d_pu;
      out.tail(spec.z) = c.Z() * s.h;
      break;
    }
  }
  return out;
}

Eigen::VectorXd extract_features(const NetworkCase& c, const DispatchSolution& s,
                                 const Eigen::VectorXd& d_pu, const Eigen::VectorXd& l_pu,
                                 const FeatureSpec& spec) {
  return normalize_features(spec, extract_raw_features(c, s, d_pu, l_pu, spec));
}

Eigen::VectorXd normalize_features(const FeatureSpec& spec, const Eigen::VectorXd& raw) {
  if (raw.size() != spec.dim()) throw SemanticError("feature dimension mismatch");
  if (!spec.normalized()) return raw;
  return (raw - spec.mean).cwiseQuotient(spec.stdev);
}

Eigen::VectorXd denormalize_features(const FeatureSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.dim()) throw SemanticError("feature dimension mismatch");
  if (!spec.normalized()) return x;
  return x.cwiseProduct(spec.stdev) + spec.mean;
}

void fit_normalization(FeatureSpec& spec, const std::vector<Eigen::VectorXd>& raw) {
  if (raw.empty()) throw SemanticError("cannot fit normalization to an empty batch");
  const int d = spec.dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& v : raw) {
    if (v.size() != d) throw SemanticError("feature dimension mismatch in batch");
    mean += v;
  }
  mean /= static_cast<double>(raw.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& v : raw) var += (v - mean).cwiseAbs2();
  var /= static_cast<double>(raw.size());
  Eigen::VectorXd sd = var.cwiseSqrt();
  // near-constant features pass through unscaled: dividing by a vanishing
  // spread would blow up the embedded constraint scaling
  for (int i = 0; i < d; ++i)
    if (sd(i) < 1e-6 * std::max(1.0, std::abs(mean(i)))) sd(i) = 1.0;
  spec.mean = mean;
  spec.stdev = sd;
}

std::string serialize_surrogate(const SurrogateModel& s) {
  std::ostringstream os;
  os << "features { variant " << to_string(s.spec.variant) << " n " << s.spec.n << " m "
     << s.spec.m << " z " << s.spec.z << " }\n";
  if (s.spec.normalized()) {
    os << "normalization {";
    for (int i = 0; i < s.spec.mean.size(); ++i)
      os << " " << fmt17(s.spec.mean(i)) << " " << fmt17(s.spec.stdev(i));
    os << " }\n";
  }
  os << "layers { count " << s.params.num_layers() << " }\n";
  for (int k = 0; k < s.params.num_layers(); ++k) {
    const auto& W = s.params.W[k];
    os << "layer { index " << k << " rows " << W.rows() << " cols " << W.cols()
       << " activation " << to_string(s.params.act[k]) << "\nweights";
    for (int i = 0; i < W.rows(); ++i)
      for (int j = 0; j < W.cols(); ++j) os << " " << fmt17(W(i, j));
    os << "\nbias";
    for (int i = 0; i < W.rows(); ++i) os << " " << fmt17(s.params.b[k](i));
    os << " }\n";
  }
  return os.str();
}

SurrogateModel parse_surrogate(const std::string& text) {
  Tokenizer tk(text);
  SurrogateModel s;
  int declared_layers = -1;
  while (!tk.done()) {
    int ln = tk.line();
    std::string sec = tk.next();
    if (sec == "features") {
      tk.expect("{");
      while (tk.peek() != "}") {
        std::string key = tk.next();
        if (key == "variant")
          s.spec.variant = feature_variant_from_string(tk.next());
        else if (key == "n")
          s.spec.n = static_cast<int>(tk.next_integer());
        else if (key == "m")
          s.spec.m = static_cast<int>(tk.next_integer());
        else if (key == "z")
          s.spec.z = static_cast<int>(tk.next_integer());
        else
          throw ParseError(ln, "unknown field '" + key + "'");
      }
      tk.expect("}");
    } else if (sec == "normalization") {
      tk.expect("{");
      std::vector<double> vals;
      while (tk.peek() != "}") vals.push_back(tk.next_number());
      tk.expect("}");
      if (vals.size() % 2 != 0) throw ParseError(ln, "normalization needs mean/stdev pairs");
      int d = static_cast<int>(vals.size() / 2);
      s.spec.mean.resize(d);
      s.spec.stdev.resize(d);
      for (int i = 0; i < d; ++i) {
        s.spec.mean(i) = vals[2 * i];
        s.spec.stdev(i) = vals[2 * i + 1];
      }
    } else if (sec == "layers") {
      tk.expect("{");
      tk.expect("count");
      declared_layers = static_cast<int>(tk.next_integer());
      tk.expect("}");
    } else if (sec == "layer") {
      tk.expect("{");
      tk.expect("index");
      long idx = tk.next_integer();
      tk.expect("rows");
      long rows = tk.next_integer();
      tk.expect("cols");
      long cols = tk.next_integer();
      tk.expect("activation");
      Activation act = activation_from_string(tk.next());
      tk.expect("weights");
      Eigen::MatrixXd W(rows, cols);
      for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) W(i, j) = tk.next_number();
      tk.expect("bias");
      Eigen::VectorXd b(rows);
      for (long i = 0; i < rows; ++i) b(i) = tk.next_number();
      tk.expect("}");
      if (idx != static_cast<long>(s.params.W.size()))
        throw ParseError(ln, "layer blocks out of order");
      s.params.W.push_back(W);
      s.params.b.push_back(b);
      s.params.act.push_back(act);
    } else {
      throw ParseError(ln, "unknown section '" + sec + "'");
    }
  }
  if (declared_layers >= 0 && declared_layers != s.params.num_layers())
    throw SemanticError("layer count does not match layer blocks");
  s.params.validate();
  if (s.params.input_dim() != s.spec.dim())
    throw SemanticError("classifier input width does not match feature layout");
  if (s.spec.mean.size() != 0 && !s.spec.normalized())
    throw SemanticError("normalization length does not match feature layout");
  return s;
}

}  // namespace tscopf
