// Copyright 2026 The FGResQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records operations in creation order; Tape::Backward walks them in
// reverse and accumulates gradients into every node that requires one.
// Parameters are long-lived leaf nodes shared across tapes; their gradients
// accumulate until the optimizer clears them. A non-recording tape evaluates
// values only, which makes inference safe to run concurrently.

#ifndef FGRESQ_AUTODIFF_H_
#define FGRESQ_AUTODIFF_H_

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fgresq::ad {

using Matrix = Eigen::MatrixXd;

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows in
  bool requires_grad = false;
  std::function<void(const Matrix&)> backward;

  void Accumulate(const Matrix& g);
  void ZeroGrad() { grad.resize(0, 0); }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix& value() const { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double scalar() const { return node_->value(0, 0); }
  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& shared() const { return node_; }
  explicit operator bool() const { return node_ != nullptr; }

 private:
  std::shared_ptr<Node> node_;
};

Var Constant(Matrix value);
Var Leaf(Matrix value, bool requires_grad);

class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const { return record_; }

  // Creates an op result. The backward closure receives d(loss)/d(result)
  // and is kept only when recording and some input requires a gradient.
  Var Emit(Matrix value, std::span<const Var> inputs,
           std::function<void(const Matrix&)> backward);

  // Seeds d(loss)/d(loss) = 1 for a 1x1 loss and propagates.
  void Backward(const Var& loss);

 private:
  bool record_;
  std::vector<std::shared_ptr<Node>> nodes_;
};

Var MatMul(Tape& t, const Var& a, const Var& b);
Var Add(Tape& t, const Var& a, const Var& b);
Var Sub(Tape& t, const Var& a, const Var& b);
// a (n x m) plus a 1 x m row broadcast over rows.
Var AddRow(Tape& t, const Var& a, const Var& row);
Var Scale(Tape& t, const Var& a, double s);
// a times a learnable 1x1 scalar.
Var MulScalar(Tape& t, const Var& a, const Var& s);
Var Exp(Tape& t, const Var& a);
Var Sigmoid(Tape& t, const Var& a);
// tanh approximation of GELU.
Var Gelu(Tape& t, const Var& a);
Var SoftmaxRows(Tape& t, const Var& a);
Var L2NormalizeRows(Tape& t, const Var& a);
Var ConcatCols(Tape& t, std::span<const Var> parts);
Var Transpose(Tape& t, const Var& a);
// Mean over consecutive blocks of `segment` rows.
Var SegmentMeanRows(Tape& t, const Var& a, Eigen::Index segment);
Var GatherRows(Tape& t, const Var& a, std::span<const Eigen::Index> rows);
Var MeanAll(Tape& t, const Var& a);
// Mean over rows of -log softmax(logits)[row, labels[row]].
Var CrossEntropyRows(Tape& t, const Var& logits,
                     std::span<const Eigen::Index> labels);

double GeluValue(double x);

}  // namespace fgresq::ad

#endif  // FGRESQ_AUTODIFF_H_
