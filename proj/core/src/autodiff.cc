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

#include "fgresq/autodiff.h"

#include <cmath>

#include "fgresq/error.h"

namespace fgresq::ad {
namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimension, std::string(op) + ": shape mismatch");
  }
}

template <typename... Vars>
std::array<Var, sizeof...(Vars)> Inputs(const Vars&... v) {
  return {v...};
}

}  // namespace

void Node::Accumulate(const Matrix& g) {
  if (!requires_grad) return;
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Var Constant(Matrix value) { return Leaf(std::move(value), false); }

Var Leaf(Matrix value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

Var Tape::Emit(Matrix value, std::span<const Var> inputs,
               std::function<void(const Matrix&)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (record_) {
    for (const auto& in : inputs) {
      if (in.requires_grad()) {
        node->requires_grad = true;
        break;
      }
    }
    if (node->requires_grad) {
      node->backward = std::move(backward);
      nodes_.push_back(node);
    }
  }
  return Var(std::move(node));
}

void Tape::Backward(const Var& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw Error(ErrorCode::kDimension, "backward needs a 1x1 loss");
  }
  if (!loss.requires_grad()) return;
  loss.node().Accumulate(Matrix::Ones(1, 1));
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (n.grad.size() != 0 && n.backward) n.backward(n.grad);
  }
}

Var MatMul(Tape& t, const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimension, "MatMul: inner dimensions differ");
  }
  auto in = Inputs(a, b);
  return t.Emit(a.value() * b.value(), in, [a, b](const Matrix& g) {
    if (a.requires_grad()) a.node().Accumulate(g * b.value().transpose());
    if (b.requires_grad()) b.node().Accumulate(a.value().transpose() * g);
  });
}

Var Add(Tape& t, const Var& a, const Var& b) {
  RequireSameShape(a, b, "Add");
  auto in = Inputs(a, b);
  return t.Emit(a.value() + b.value(), in, [a, b](const Matrix& g) {
    a.node().Accumulate(g);
    b.node().Accumulate(g);
  });
}

Var Sub(Tape& t, const Var& a, const Var& b) {
  RequireSameShape(a, b, "Sub");
  auto in = Inputs(a, b);
  return t.Emit(a.value() - b.value(), in, [a, b](const Matrix& g) {
    a.node().Accumulate(g);
    if (b.requires_grad()) b.node().Accumulate(-g);
  });
}

Var AddRow(Tape& t, const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw Error(ErrorCode::kDimension, "AddRow: bias shape mismatch");
  }
  Matrix v = a.value();
  v.rowwise() += row.value().row(0);
  auto in = Inputs(a, row);
  return t.Emit(std::move(v), in, [a, row](const Matrix& g) {
    a.node().Accumulate(g);
    if (row.requires_grad()) row.node().Accumulate(g.colwise().sum());
  });
}

Var Scale(Tape& t, const Var& a, double s) {
  auto in = Inputs(a);
  return t.Emit(a.value() * s, in,
                [a, s](const Matrix& g) { a.node().Accumulate(g * s); });
}

Var MulScalar(Tape& t, const Var& a, const Var& s) {
  if (s.rows() != 1 || s.cols() != 1) {
    throw Error(ErrorCode::kDimension, "MulScalar: scale must be 1x1");
  }
  auto in = Inputs(a, s);
  return t.Emit(a.value() * s.scalar(), in, [a, s](const Matrix& g) {
    if (a.requires_grad()) a.node().Accumulate(g * s.scalar());
    if (s.requires_grad()) {
      s.node().Accumulate(Matrix::Constant(1, 1, g.cwiseProduct(a.value()).sum()));
    }
  });
}

Var Exp(Tape& t, const Var& a) {
  Matrix v = a.value().array().exp().matrix();
  auto in = Inputs(a);
  return t.Emit(v, in, [a, v](const Matrix& g) {
    a.node().Accumulate(g.cwiseProduct(v));
  });
}

Var Sigmoid(Tape& t, const Var& a) {
  Matrix v = a.value().unaryExpr([](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  });
  auto in = Inputs(a);
  return t.Emit(v, in, [a, v](const Matrix& g) {
    a.node().Accumulate(
        (g.array() * v.array() * (1.0 - v.array())).matrix());
  });
}

double GeluValue(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluK * x * x * x)));
}

Var Gelu(Tape& t, const Var& a) {
  Matrix v = a.value().unaryExpr(&GeluValue);
  auto in = Inputs(a);
  return t.Emit(std::move(v), in, [a](const Matrix& g) {
    Matrix d = a.value().unaryExpr([](double x) {
      const double u = kGeluC * (x + kGeluK * x * x * x);
      const double th = std::tanh(u);
      return 0.5 * (1.0 + th) +
             0.5 * x * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluK * x * x);
    });
    a.node().Accumulate(g.cwiseProduct(d));
  });
}

Var SoftmaxRows(Tape& t, const Var& a) {
  Matrix v = a.value();
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double m = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - m).exp().matrix();
    v.row(r) /= v.row(r).sum();
  }
  auto in = Inputs(a);
  return t.Emit(v, in, [a, v](const Matrix& g) {
    Matrix dot = g.cwiseProduct(v).rowwise().sum();
    Matrix gin = v.cwiseProduct(g - dot.replicate(1, g.cols()));
    a.node().Accumulate(gin);
  });
}

Var L2NormalizeRows(Tape& t, const Var& a) {
  Eigen::VectorXd norms = a.value().rowwise().norm();
  norms = norms.cwiseMax(1e-12);
  Matrix v = norms.cwiseInverse().asDiagonal() * a.value();
  auto in = Inputs(a);
  return t.Emit(v, in, [a, v, norms](const Matrix& g) {
    Eigen::VectorXd dot = g.cwiseProduct(v).rowwise().sum();
    Matrix gin = g - dot.asDiagonal() * v;
    a.node().Accumulate(norms.cwiseInverse().asDiagonal() * gin);
  });
}

Var ConcatCols(Tape& t, std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::kDimension, "ConcatCols: no parts");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw Error(ErrorCode::kDimension, "ConcatCols: row counts differ");
    }
    cols += p.cols();
  }
  Matrix v(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    v.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  std::vector<Var> held(parts.begin(), parts.end());
  return t.Emit(std::move(v), parts, [held](const Matrix& g) {
    Eigen::Index off = 0;
    for (const auto& p : held) {
      if (p.requires_grad()) p.node().Accumulate(g.middleCols(off, p.cols()));
      off += p.cols();
    }
  });
}

Var Transpose(Tape& t, const Var& a) {
  auto in = Inputs(a);
  return t.Emit(a.value().transpose(), in, [a](const Matrix& g) {
    a.node().Accumulate(g.transpose());
  });
}

Var SegmentMeanRows(Tape& t, const Var& a, Eigen::Index segment) {
  if (segment <= 0 || a.rows() % segment != 0) {
    throw Error(ErrorCode::kDimension, "SegmentMeanRows: bad segment length");
  }
  const Eigen::Index groups = a.rows() / segment;
  Matrix v(groups, a.cols());
  for (Eigen::Index gi = 0; gi < groups; ++gi) {
    v.row(gi) = a.value().middleRows(gi * segment, segment).colwise().mean();
  }
  auto in = Inputs(a);
  return t.Emit(std::move(v), in, [a, segment, groups](const Matrix& g) {
    Matrix gin(a.rows(), a.cols());
    for (Eigen::Index gi = 0; gi < groups; ++gi) {
      gin.middleRows(gi * segment, segment) =
          (g.row(gi) / static_cast<double>(segment)).replicate(segment, 1);
    }
    a.node().Accumulate(gin);
  });
}

Var GatherRows(Tape& t, const Var& a, std::span<const Eigen::Index> rows) {
  Matrix v(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) {
      throw Error(ErrorCode::kDimension, "GatherRows: index out of range");
    }
    v.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  }
  std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  auto in = Inputs(a);
  return t.Emit(std::move(v), in, [a, idx](const Matrix& g) {
    Matrix gin = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      gin.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
    }
    a.node().Accumulate(gin);
  });
}

Var MeanAll(Tape& t, const Var& a) {
  const double n = static_cast<double>(a.value().size());
  auto in = Inputs(a);
  return t.Emit(Matrix::Constant(1, 1, a.value().mean()), in,
                [a, n](const Matrix& g) {
                  a.node().Accumulate(
                      Matrix::Constant(a.rows(), a.cols(), g(0, 0) / n));
                });
}

Var CrossEntropyRows(Tape& t, const Var& logits,
                     std::span<const Eigen::Index> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw Error(ErrorCode::kDimension, "CrossEntropyRows: label count mismatch");
  }
  const Eigen::Index n = logits.rows();
  Matrix probs(n, logits.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double m = logits.value().row(r).maxCoeff();
    Eigen::RowVectorXd e = (logits.value().row(r).array() - m).exp().matrix();
    const double z = e.sum();
    probs.row(r) = e / z;
    loss += -(logits.value()(r, labels[r]) - m - std::log(z));
  }
  loss /= static_cast<double>(n);
  std::vector<Eigen::Index> lab(labels.begin(), labels.end());
  auto in = Inputs(logits);
  return t.Emit(Matrix::Constant(1, 1, loss), in,
                [logits, probs, lab, n](const Matrix& g) {
                  Matrix gin = probs;
                  for (Eigen::Index r = 0; r < n; ++r) gin(r, lab[r]) -= 1.0;
                  logits.node().Accumulate(gin * (g(0, 0) / static_cast<double>(n)));
                });
}

}  // namespace fgresq::ad
