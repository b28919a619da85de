// Copyright 2026 The Seq2Biseq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef S2B_GRADIENT_CHECK_HPP_
#define S2B_GRADIENT_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2b/autodiff.hpp"

namespace s2b {

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;

  bool passed(double tolerance) const { return max_relative_error <= tolerance; }
};

// Compares the backpropagated gradient of `loss` against central differences
// (f(t+eps) - f(t-eps)) / (2 eps), one parameter coordinate at a time.
//
// `loss` builds a fresh graph and returns its scalar root: it is called as
// loss(graph) -> Var<double>. Any randomness inside it must be frozen; the
// check evaluates it twice at the starting point and throws if the two values
// are not bit-identical.
//
// Relative error is |a - n| / max(|a|, |n|, floor).
template <typename LossFn>
GradientCheckReport finite_difference_check(std::span<Parameter<double>* const> params,
                                            LossFn&& loss, double eps = 1e-5,
                                            double floor = 1e-6) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_difference_check: eps must be > 0");

  auto evaluate = [&]() {
    Graph<double> g;
    return loss(g).scalar();
  };

  for (auto* p : params) p->zero_grad();
  double base = 0.0;
  {
    Graph<double> g;
    Var<double> root = loss(g);
    base = root.scalar();
    g.backward(root);
  }
  if (evaluate() != base) {
    throw std::runtime_error("finite_difference_check: loss is not deterministic");
  }

  std::vector<Matrix<double>> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad);

  GradientCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter<double>& p = *params[k];
    for (Index i = 0; i < p.value.size(); ++i) {
      double& theta = p.value.data()[i];
      const double saved = theta;
      theta = saved + eps;
      const double plus = evaluate();
      theta = saved - eps;
      const double minus = evaluate();
      theta = saved;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[k].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_relative_error || report.worst_index < 0) {
        report.max_relative_error = rel;
        report.worst_parameter = p.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->grad = analytic[k];
  return report;
}

}  // namespace s2b

#endif  // S2B_GRADIENT_CHECK_HPP_
