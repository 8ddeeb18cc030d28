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

#ifndef MBDTG_MBD_AUTODIFF_H_
#define MBDTG_MBD_AUTODIFF_H_

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace mbdtg::mbd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  bool trainable = true;
};

// Named tensors owned by a model. Ids are stable insertion indices.
class ParameterStore {
 public:
  int Add(std::string name, Matrix value);
  int Find(const std::string &name) const;  // -1 when absent

  Parameter &at(int id) { return params_.at(id); }
  const Parameter &at(int id) const { return params_.at(id); }
  size_t size() const { return params_.size(); }
  size_t ScalarCount() const;

  // One zero matrix per parameter, shaped like its value.
  std::vector<Matrix> ZeroGradients() const;

 private:
  std::vector<Parameter> params_;
};

enum class OpKind {
  kConstant,
  kParam,
  kLookup,
  kMatMul,
  kAdd,
  kMul,
  kScale,
  kScaleBy,
  kAffine,
  kSigmoid,
  kTanh,
  kLog,
  kSoftmax,
  kConcat,
  kSlice,
  kHStack,
  kTranspose,
  kPick,
  kSum,
};

// Handle to a node on a Tape.
struct Var {
  int id = -1;
};

// Records a computation over matrices and replays it backwards. Gradients for
// parameters are accumulated into an external buffer so several tapes can
// share one ParameterStore.
class Tape {
 public:
  // `gradients` may be null for forward-only use.
  Tape(const ParameterStore *params, std::vector<Matrix> *gradients);

  Var Constant(Matrix value);
  Var Param(int param_id);
  // Row `row` of a parameter as a column vector.
  Var Lookup(int param_id, int row);

  Var MatMul(Var a, Var b);
  Var Add(Var a, Var b);
  Var Mul(Var a, Var b);                // elementwise
  Var Scale(Var a, double factor);
  Var ScaleBy(Var a, Var scalar);      // scalar is 1x1
  Var Affine(Var a, double alpha, double beta);  // alpha * a + beta
  Var Sigmoid(Var a);
  Var Tanh(Var a);
  Var Log(Var a);
  Var Softmax(Var a);                  // over a column vector
  Var Concat(const std::vector<Var> &parts);  // vertical
  Var Slice(Var a, int start, int length);    // rows
  Var HStack(const std::vector<Var> &columns);
  Var Transpose(Var a);
  Var Pick(Var a, int row);            // 1x1
  Var Sum(Var a);                      // 1x1

  const Matrix &value(Var v) const;
  double scalar(Var v) const { return value(v)(0, 0); }
  size_t size() const { return nodes_.size(); }

  // Seeds d(out)/d(out) = 1 and propagates to every node and parameter.
  void Backward(Var out);

  // Negates the backward contribution of one op kind. Used to check that the
  // gradient checker catches a broken derivative.
  void set_fault(std::optional<OpKind> fault) { fault_ = fault; }

 private:
  struct Node {
    OpKind op = OpKind::kConstant;
    Matrix value;
    Matrix grad;
    int a = -1;
    int b = -1;
    int param = -1;
    int index = 0;
    int length = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<int> inputs;
  };

  Var Push(Node node);
  template <typename Expr>
  void Accumulate(int node, const Expr &grad);
  void BackwardNode(int id);

  const ParameterStore *params_;
  std::vector<Matrix> *gradients_;
  std::vector<Node> nodes_;
  std::optional<OpKind> fault_;
};

}  // namespace mbdtg::mbd

#endif  // MBDTG_MBD_AUTODIFF_H_
