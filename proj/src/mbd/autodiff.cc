// Copyright 2026 The mbdtg Authors.
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

#include "mbdtg/mbd/autodiff.h"

#include <cassert>

#include "mbdtg/error.h"

namespace mbdtg::mbd {

int ParameterStore::Add(std::string name, Matrix value) {
  params_.push_back(Parameter{std::move(name), std::move(value), true});
  return static_cast<int>(params_.size()) - 1;
}

int ParameterStore::Find(const std::string &name) const {
  for (size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

size_t ParameterStore::ScalarCount() const {
  size_t n = 0;
  for (const auto &p : params_) n += static_cast<size_t>(p.value.size());
  return n;
}

std::vector<Matrix> ParameterStore::ZeroGradients() const {
  std::vector<Matrix> grads;
  grads.reserve(params_.size());
  for (const auto &p : params_) grads.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  return grads;
}

Tape::Tape(const ParameterStore *params, std::vector<Matrix> *gradients)
    : params_(params), gradients_(gradients) {
  nodes_.reserve(1024);
}

Var Tape::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix &Tape::value(Var v) const {
  const Node &node = nodes_[v.id];
  if (node.op == OpKind::kParam) return params_->at(node.param).value;
  return node.value;
}

Var Tape::Constant(Matrix value) {
  Node node;
  node.op = OpKind::kConstant;
  node.value = std::move(value);
  return Push(std::move(node));
}

Var Tape::Param(int param_id) {
  Node node;
  node.op = OpKind::kParam;
  node.param = param_id;
  return Push(std::move(node));
}

Var Tape::Lookup(int param_id, int row) {
  Node node;
  node.op = OpKind::kLookup;
  node.param = param_id;
  node.index = row;
  node.value = params_->at(param_id).value.row(row).transpose();
  return Push(std::move(node));
}

Var Tape::MatMul(Var a, Var b) {
  Node node;
  node.op = OpKind::kMatMul;
  node.a = a.id;
  node.b = b.id;
  assert(value(a).cols() == value(b).rows());
  node.value.noalias() = value(a) * value(b);
  return Push(std::move(node));
}

Var Tape::Add(Var a, Var b) {
  Node node;
  node.op = OpKind::kAdd;
  node.a = a.id;
  node.b = b.id;
  node.value = value(a) + value(b);
  return Push(std::move(node));
}

Var Tape::Mul(Var a, Var b) {
  Node node;
  node.op = OpKind::kMul;
  node.a = a.id;
  node.b = b.id;
  node.value = value(a).cwiseProduct(value(b));
  return Push(std::move(node));
}

Var Tape::Scale(Var a, double factor) {
  Node node;
  node.op = OpKind::kScale;
  node.a = a.id;
  node.alpha = factor;
  node.value = factor * value(a);
  return Push(std::move(node));
}

Var Tape::ScaleBy(Var a, Var scalar) {
  Node node;
  node.op = OpKind::kScaleBy;
  node.a = a.id;
  node.b = scalar.id;
  node.value = this->scalar(scalar) * value(a);
  return Push(std::move(node));
}

Var Tape::Affine(Var a, double alpha, double beta) {
  Node node;
  node.op = OpKind::kAffine;
  node.a = a.id;
  node.alpha = alpha;
  node.value = (alpha * value(a)).array() + beta;
  return Push(std::move(node));
}

Var Tape::Sigmoid(Var a) {
  Node node;
  node.op = OpKind::kSigmoid;
  node.a = a.id;
  node.value = (1.0 + (-value(a).array()).exp()).inverse().matrix();
  return Push(std::move(node));
}

Var Tape::Tanh(Var a) {
  Node node;
  node.op = OpKind::kTanh;
  node.a = a.id;
  node.value = value(a).array().tanh().matrix();
  return Push(std::move(node));
}

Var Tape::Log(Var a) {
  Node node;
  node.op = OpKind::kLog;
  node.a = a.id;
  node.value = value(a).array().log().matrix();
  return Push(std::move(node));
}

Var Tape::Softmax(Var a) {
  Node node;
  node.op = OpKind::kSoftmax;
  node.a = a.id;
  const Matrix &x = value(a);
  const double shift = x.maxCoeff();
  Matrix e = (x.array() - shift).exp().matrix();
  node.value = e / e.sum();
  return Push(std::move(node));
}

Var Tape::Concat(const std::vector<Var> &parts) {
  Node node;
  node.op = OpKind::kConcat;
  Eigen::Index rows = 0;
  const Eigen::Index cols = value(parts.front()).cols();
  for (const auto &p : parts) {
    node.inputs.push_back(p.id);
    rows += value(p).rows();
  }
  node.value.resize(rows, cols);
  Eigen::Index offset = 0;
  for (const auto &p : parts) {
    const Matrix &v = value(p);
    node.value.middleRows(offset, v.rows()) = v;
    offset += v.rows();
  }
  return Push(std::move(node));
}

Var Tape::Slice(Var a, int start, int length) {
  Node node;
  node.op = OpKind::kSlice;
  node.a = a.id;
  node.index = start;
  node.length = length;
  node.value = value(a).middleRows(start, length);
  return Push(std::move(node));
}

Var Tape::HStack(const std::vector<Var> &columns) {
  Node node;
  node.op = OpKind::kHStack;
  const Eigen::Index rows = value(columns.front()).rows();
  node.value.resize(rows, static_cast<Eigen::Index>(columns.size()));
  for (size_t j = 0; j < columns.size(); ++j) {
    node.inputs.push_back(columns[j].id);
    node.value.col(static_cast<Eigen::Index>(j)) = value(columns[j]).col(0);
  }
  return Push(std::move(node));
}

Var Tape::Transpose(Var a) {
  Node node;
  node.op = OpKind::kTranspose;
  node.a = a.id;
  node.value = value(a).transpose();
  return Push(std::move(node));
}

Var Tape::Pick(Var a, int row) {
  Node node;
  node.op = OpKind::kPick;
  node.a = a.id;
  node.index = row;
  node.value = Matrix::Constant(1, 1, value(a)(row, 0));
  return Push(std::move(node));
}

Var Tape::Sum(Var a) {
  Node node;
  node.op = OpKind::kSum;
  node.a = a.id;
  node.value = Matrix::Constant(1, 1, value(a).sum());
  return Push(std::move(node));
}

template <typename Expr>
void Tape::Accumulate(int id, const Expr &grad) {
  Node &node = nodes_[id];
  switch (node.op) {
    case OpKind::kConstant:
      return;
    case OpKind::kParam:
      if (gradients_ != nullptr) (*gradients_)[node.param] += grad;
      return;
    default:
      if (node.grad.size() == 0) {
        node.grad = grad;
      } else {
        node.grad += grad;
      }
  }
}

void Tape::Backward(Var out) {
  if (value(out).size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "backward: output must be a scalar");
  }
  Accumulate(out.id, Matrix::Ones(1, 1));
  for (int id = out.id; id >= 0; --id) {
    if (nodes_[id].grad.size() != 0) BackwardNode(id);
  }
}

void Tape::BackwardNode(int id) {
  // Copy: Accumulate may reallocate other nodes' grads but never this one.
  const Matrix g = fault_.has_value() && *fault_ == nodes_[id].op ? Matrix(-nodes_[id].grad)
                                                                  : nodes_[id].grad;
  const Node &node = nodes_[id];
  switch (node.op) {
    case OpKind::kConstant:
    case OpKind::kParam:
      break;
    case OpKind::kLookup:
      if (gradients_ != nullptr) (*gradients_)[node.param].row(node.index) += g.transpose();
      break;
    case OpKind::kMatMul: {
      const int a = node.a, b = node.b;
      Accumulate(a, g * value(Var{b}).transpose());
      Accumulate(b, value(Var{a}).transpose() * g);
      break;
    }
    case OpKind::kAdd: {
      const int a = node.a, b = node.b;
      Accumulate(a, g);
      Accumulate(b, g);
      break;
    }
    case OpKind::kMul: {
      const int a = node.a, b = node.b;
      Accumulate(a, g.cwiseProduct(value(Var{b})));
      Accumulate(b, g.cwiseProduct(value(Var{a})));
      break;
    }
    case OpKind::kScale:
    case OpKind::kAffine:
      Accumulate(node.a, node.alpha * g);
      break;
    case OpKind::kScaleBy: {
      const int a = node.a, b = node.b;
      const double s = scalar(Var{b});
      Accumulate(b, Matrix::Constant(1, 1, g.cwiseProduct(value(Var{a})).sum()));
      Accumulate(a, s * g);
      break;
    }
    case OpKind::kSigmoid: {
      const Matrix &y = node.value;
      Accumulate(node.a, (g.array() * y.array() * (1.0 - y.array())).matrix());
      break;
    }
    case OpKind::kTanh: {
      const Matrix &y = node.value;
      Accumulate(node.a, (g.array() * (1.0 - y.array().square())).matrix());
      break;
    }
    case OpKind::kLog:
      Accumulate(node.a, (g.array() / value(Var{node.a}).array()).matrix());
      break;
    case OpKind::kSoftmax: {
      const Matrix &y = node.value;
      const double dot = g.cwiseProduct(y).sum();
      Accumulate(node.a, (y.array() * (g.array() - dot)).matrix());
      break;
    }
    case OpKind::kConcat: {
      const std::vector<int> inputs = node.inputs;
      Eigen::Index offset = 0;
      for (int input : inputs) {
        const Eigen::Index rows = value(Var{input}).rows();
        Accumulate(input, g.middleRows(offset, rows));
        offset += rows;
      }
      break;
    }
    case OpKind::kSlice: {
      const int a = node.a, start = node.index, length = node.length;
      Node &target = nodes_[a];
      if (target.op == OpKind::kConstant) break;
      if (target.op == OpKind::kParam) {
        if (gradients_ != nullptr) (*gradients_)[target.param].middleRows(start, length) += g;
        break;
      }
      if (target.grad.size() == 0) target.grad = Matrix::Zero(target.value.rows(), target.value.cols());
      target.grad.middleRows(start, length) += g;
      break;
    }
    case OpKind::kHStack: {
      const std::vector<int> inputs = node.inputs;
      for (size_t j = 0; j < inputs.size(); ++j) {
        Accumulate(inputs[j], g.col(static_cast<Eigen::Index>(j)));
      }
      break;
    }
    case OpKind::kTranspose:
      Accumulate(node.a, g.transpose());
      break;
    case OpKind::kPick: {
      const int a = node.a, row = node.index;
      Node &target = nodes_[a];
      if (target.op == OpKind::kConstant) break;
      if (target.op == OpKind::kParam) {
        if (gradients_ != nullptr) (*gradients_)[target.param](row, 0) += g(0, 0);
        break;
      }
      if (target.grad.size() == 0) target.grad = Matrix::Zero(target.value.rows(), target.value.cols());
      target.grad(row, 0) += g(0, 0);
      break;
    }
    case OpKind::kSum: {
      const Matrix &x = value(Var{node.a});
      Accumulate(node.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
      break;
    }
  }
}

}  // namespace mbdtg::mbd
