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

#ifndef S2B_PARAMETERS_HPP_
#define S2B_PARAMETERS_HPP_

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "s2b/autodiff.hpp"

namespace s2b {

// Owns the named parameters of a model. Parameter addresses are stable for the
// lifetime of the set (including across moves), so layer views may keep
// pointers to them.
template <typename Scalar>
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;

  Parameter<Scalar>* add(std::string name, Matrix<Scalar> value) {
    if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter name: " + name);
    params_.push_back(std::make_unique<Parameter<Scalar>>(std::move(name), std::move(value)));
    return params_.back().get();
  }

  Parameter<Scalar>* find(std::string_view name) const {
    for (const auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }

  Parameter<Scalar>& at(std::string_view name) const {
    Parameter<Scalar>* p = find(name);
    if (p == nullptr) throw std::out_of_range("no parameter named " + std::string(name));
    return *p;
  }

  std::vector<Parameter<Scalar>*> all() const {
    std::vector<Parameter<Scalar>*> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.get());
    return out;
  }

  std::size_t count() const { return params_.size(); }

  Index total_size() const {
    Index n = 0;
    for (const auto& p : params_) n += p->size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  std::vector<Matrix<Scalar>> snapshot() const {
    std::vector<Matrix<Scalar>> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->value);
    return out;
  }

  void restore(const std::vector<Matrix<Scalar>>& values) {
    if (values.size() != params_.size()) throw std::invalid_argument("snapshot size mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i]->value = values[i];
  }

 private:
  std::vector<std::unique_ptr<Parameter<Scalar>>> params_;
};

// Global L2 norm of the gradients of `params`.
template <typename Scalar>
Scalar gradient_norm(std::span<Parameter<Scalar>* const> params) {
  Scalar sq = 0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

// Rescales gradients so their global norm is at most max_norm. Returns the
// norm before clipping.
template <typename Scalar>
Scalar clip_gradient_norm(std::span<Parameter<Scalar>* const> params, Scalar max_norm) {
  const Scalar norm = gradient_norm(params);
  if (norm > max_norm) {
    const Scalar factor = max_norm / norm;
    for (auto* p : params) p->grad *= factor;
  }
  return norm;
}

}  // namespace s2b

#endif  // S2B_PARAMETERS_HPP_
