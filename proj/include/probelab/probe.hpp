#pragma once

#include "probelab/linalg.hpp"

#include <string>
#include <vector>

namespace probelab {

enum class ProbeKind { ccs, logreg };

inline std::string to_string(ProbeKind k) { return k == ProbeKind::ccs ? "ccs" : "logreg"; }

/// p(x) = sigmoid(w . x + b)
struct LinearProbe {
  Vector w;
  double b = 0.0;
  ProbeKind kind = ProbeKind::ccs;
  bool flipped = false;
  double final_loss = 0.0;
};

/// Unit direction with the largest-magnitude entry positive.
struct DirectionProbe {
  Vector u;
  bool flipped = false;
  std::string sign_convention = "max_abs_entry_positive";
  double eigenvalue = 0.0;
  std::size_t iterations = 0;
};

struct Predictions {
  std::vector<int> labels;
  Vector scores;
};

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  return (1.0 / (1.0 + (-z).exp())).eval();
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace probelab
