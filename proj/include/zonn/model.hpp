#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "zonn/error.hpp"
#include "zonn/types.hpp"

namespace zonn {

enum class Activation { relu, sigmoid, tanh, identity };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "identity";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  fail(ErrorKind::validation, "unknown activation '" + std::string(name) + "'");
}

/// Applies `a` elementwise, in place.
template <class Derived>
void activate_inplace(Activation a, Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  switch (a) {
    case Activation::relu:
      z = z.cwiseMax(Scalar(0));
      break;
    case Activation::sigmoid:
      z = z.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
      break;
    case Activation::tanh:
      z = z.unaryExpr([](Scalar v) { return std::tanh(v); });
      break;
    case Activation::identity:
      break;
  }
}

/// Derivative of the activation, expressed through its pre-activation `z`
/// and output `y` (whichever is cheaper).
template <class DerivedZ, class DerivedY>
auto activation_derivative(Activation a, const Eigen::MatrixBase<DerivedZ>& z,
                           const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedZ::Scalar;
  using Plain = typename DerivedZ::PlainObject;
  switch (a) {
    case Activation::relu:
      return Plain((z.array() > Scalar(0)).template cast<Scalar>().matrix());
    case Activation::sigmoid:
      return Plain((y.array() * (Scalar(1) - y.array())).matrix());
    case Activation::tanh:
      return Plain((Scalar(1) - y.array().square()).matrix());
    case Activation::identity:
      break;
  }
  return Plain(Plain::Ones(z.rows(), z.cols()));
}

/// Softmax over each column, max-subtracted.
template <class Derived>
typename Derived::PlainObject softmax(const Eigen::MatrixBase<Derived>& logits) {
  typename Derived::PlainObject out = logits;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    auto col = out.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
  return out;
}

template <class Scalar_>
struct DenseLayer {
  using Scalar = Scalar_;
  colmat_type<Scalar> weights;  // out_dim x in_dim
  colvec_type<Scalar> bias;     // out_dim
  Activation activation = Activation::identity;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }

  bool operator==(const DenseLayer&) const = default;
};

/// Feed-forward classifier [0,1]^d -> probability simplex. The softmax
/// output map is applied by `forward` and is not a layer activation.
/// Immutable once constructed; all inference members are const and
/// thread-safe.
template <class Scalar_>
class Mlp {
 public:
  using Scalar = Scalar_;
  using Layer = DenseLayer<Scalar>;
  using VectorType = colvec_type<Scalar>;
  using MatrixType = colmat_type<Scalar>;

  Mlp() = default;

  explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) { validate(); }

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  Eigen::Index input_dim() const { return layers_.front().in_dim(); }
  Eigen::Index num_classes() const { return layers_.back().out_dim(); }
  Eigen::Index num_parameters() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
  }

  /// Pre-softmax logits for a batch; columns of `x` are inputs.
  template <class Derived>
  MatrixType logits_batch(const Eigen::MatrixBase<Derived>& x) const {
    check_batch(x);
    MatrixType h = x.template cast<Scalar>();
    for (const auto& l : layers_) {
      MatrixType z = l.weights * h;
      z.colwise() += l.bias;
      activate_inplace(l.activation, z);
      h = std::move(z);
    }
    require(h.allFinite(), ErrorKind::numeric, "non-finite value during inference");
    return h;
  }

  /// Class probabilities for a batch; columns of `x` are inputs.
  template <class Derived>
  MatrixType predict_batch(const Eigen::MatrixBase<Derived>& x) const {
    MatrixType p = softmax(logits_batch(x));
    require(p.allFinite(), ErrorKind::numeric, "non-finite probability");
    return p;
  }

  template <class Derived>
  VectorType logits(const Eigen::MatrixBase<Derived>& x) const {
    require(x.cols() == 1, ErrorKind::shape, "expected a single input column");
    return logits_batch(x).col(0);
  }

  template <class Derived>
  VectorType predict(const Eigen::MatrixBase<Derived>& x) const {
    require(x.cols() == 1, ErrorKind::shape, "expected a single input column");
    return predict_batch(x).col(0);
  }

  bool operator==(const Mlp&) const = default;

 private:
  void validate() const {
    require(!layers_.empty(), ErrorKind::validation, "model has no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      const std::string where = "layer " + std::to_string(i);
      require(l.weights.rows() > 0 && l.weights.cols() > 0, ErrorKind::validation,
              where + ": empty weight matrix");
      require(l.weights.rows() == l.bias.size(), ErrorKind::validation,
              where + ": weights have " + std::to_string(l.weights.rows()) + " rows but bias has " +
                  std::to_string(l.bias.size()) + " entries");
      require(l.weights.allFinite() && l.bias.allFinite(), ErrorKind::validation,
              where + ": non-finite parameter");
      if (i > 0) {
        require(layers_[i - 1].out_dim() == l.in_dim(), ErrorKind::validation,
                where + ": input dimension " + std::to_string(l.in_dim()) +
                    " does not chain with previous output " + std::to_string(layers_[i - 1].out_dim()));
      }
    }
    require(num_classes() >= 2, ErrorKind::validation, "a classifier needs at least 2 classes");
  }

  template <class Derived>
  void check_batch(const Eigen::MatrixBase<Derived>& x) const {
    require(x.rows() == input_dim(), ErrorKind::shape,
            "input has dimension " + std::to_string(x.rows()) + ", model expects " +
                std::to_string(input_dim()));
    require(in_unit_cube(x), ErrorKind::domain, "input component outside [0, 1]");
  }

  std::vector<Layer> layers_;
};

using MlpModel = Mlp<double>;

/// Probability vector for one input.
template <class Scalar, class Derived>
colvec_type<Scalar> forward(const Mlp<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  return model.predict(x);
}

template <class Scalar, class Derived>
colvec_type<Scalar> forward_logits(const Mlp<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  return model.logits(x);
}

/// Index of the largest component; ties go to the lowest index.
template <class Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

/// Model whose every weight and bias is zero; predicts the uniform vector.
inline MlpModel make_zero_model(Eigen::Index input_dim, Eigen::Index num_classes) {
  DenseLayer<double> l{Matrix::Zero(num_classes, input_dim), Vector::Zero(num_classes), Activation::identity};
  return MlpModel({l});
}

}  // namespace zonn
