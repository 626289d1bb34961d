/*
 * Copyright 2026 The PIGAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Dense double-precision building blocks with hand-written backward passes.
//
// Everything here is a pure function over explicit state. Randomness always
// comes in through an explicit `Rng&` so that a seed fully determines a run.

#ifndef PIGAT_NUMERIC_H_
#define PIGAT_NUMERIC_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pigat {

using Rng = std::mt19937_64;
using Vector = std::vector<double>;
// 1 = live position, 0 = padding.
using Mask = std::vector<std::uint8_t>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Misuse of an API, e.g. a backward call with a cache from another forward.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row-major dense matrix. A vector parameter is stored as a 1 x n matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix FromRows(
      std::initializer_list<std::initializer_list<double>> rows);
  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void SetZero();
  std::string ShapeString() const;
  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A trainable (or frozen) tensor together with its gradient accumulator.
struct Param {
  Param() = default;
  Param(std::string n, std::size_t rows, std::size_t cols,
        bool is_trainable = true)
      : name(std::move(n)),
        value(rows, cols),
        grad(rows, cols),
        trainable(is_trainable) {}

  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
};

double Dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> y);

// Returns W x + b.
Vector AffineForward(const Matrix& w, std::span<const double> x,
                     std::span<const double> b);

// Accumulates dL/dW += g x^T and dL/db += g into the given buffers (either
// may be null) and, when `grad_x` is non-null, dL/dx += W^T g.
void AffineBackward(const Matrix& w, std::span<const double> x,
                    std::span<const double> grad_out, Matrix* grad_w,
                    std::span<double> grad_b, std::span<double> grad_x);

inline constexpr double kDefaultLeakySlope = 0.01;

Vector LeakyRelu(std::span<const double> x, double slope = kDefaultLeakySlope);
// Multiplies `grad` in place by the leaky-relu derivative at `pre`.
void LeakyReluBackward(std::span<const double> pre, double slope,
                       std::span<double> grad);

Vector Softmax(std::span<const double> z);
// Softmax over live positions; dead positions are exactly 0 and an all-dead
// mask produces the zero vector.
Vector MaskedSoftmax(std::span<const double> z, const Mask& mask);
// Given the softmax output `p` and dL/dp, returns dL/dz.
Vector SoftmaxBackward(std::span<const double> p,
                       std::span<const double> grad_p);

inline constexpr double kProbabilityFloor = 1e-7;

double Sigmoid(double x);
double ClampProbability(double p);

// ----------------------------------------------------------------------------
// Feed-forward networks.

struct FfnLayer {
  Param weight;  // out x in
  Param bias;    // 1 x out
  bool activation = true;
};

struct FfnParams {
  std::vector<FfnLayer> layers;
  double slope = kDefaultLeakySlope;

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::vector<Param*> Parameters();
};

// Builds an FFN with the given layer widths (widths[0] is the input). Hidden
// layers use leaky-relu; the output layer is linear unless
// `activate_output` is set. Weights are Xavier-uniform and biases zero.
FfnParams MakeFfn(std::string_view name, const std::vector<std::size_t>& widths,
                  bool activate_output, Rng& rng,
                  double slope = kDefaultLeakySlope);

// Throws ShapeError if consecutive layer widths do not chain.
void ValidateFfn(const FfnParams& p);

struct FfnCache {
  const FfnParams* owner = nullptr;
  std::vector<Vector> inputs;  // input of every layer
  std::vector<Vector> pre;     // pre-activation of every layer
};

Vector FfnForward(const FfnParams& p, std::span<const double> x,
                  FfnCache* cache);

// Accumulates parameter gradients into `p` and returns dL/dx.
Vector FfnBackward(FfnParams& p, const FfnCache& cache,
                   std::span<const double> grad_out);

// Xavier-uniform fill in +-sqrt(6 / (fan_in + fan_out)).
void XavierUniform(Matrix& m, std::size_t fan_in, std::size_t fan_out,
                   Rng& rng);

// ----------------------------------------------------------------------------
// Optimisation.

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Coupled L2: lambda * param is added to the gradient before the moments.
  double l2 = 0.0;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(const std::vector<Param*>& params, AdamOptions options);

  // Applies one bias-corrected Adam update to every trainable param and
  // increments the step counter. Gradients are left untouched.
  void Step(const std::vector<Param*>& params);

  std::int64_t step() const { return step_; }
  AdamOptions& options() { return options_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  AdamOptions options_;
  std::int64_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every i.
Vector FiniteDifferenceGradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h = 1e-5);

// Inverted-dropout scaling vector: kept units carry 1 / (1 - ratio), dropped
// ones 0. Outside training the result is all ones.
Vector DropoutMask(std::size_t len, double ratio, Rng& rng, bool training);

// Derives an independent stream seed for a named purpose from a root seed.
std::uint64_t DeriveSeed(std::uint64_t root, std::string_view purpose);

// Uniform double in [lo, hi) computed from raw engine bits, identical across
// standard libraries.
double UniformReal(Rng& rng, double lo, double hi);
double StandardNormal(Rng& rng);
// Uniform integer in [0, n), n > 0.
std::size_t UniformIndex(Rng& rng, std::size_t n);
// Fisher-Yates shuffle driven by UniformIndex.
template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformIndex(rng, i)]);
  }
}

}  // namespace pigat

#endif  // PIGAT_NUMERIC_H_
