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

#include "pigat/numeric.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pigat {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match shape " + ShapeString());
  }
}

Matrix Matrix::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

std::string Matrix::ShapeString() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  // Four independent partial sums keep the add latency chain short.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  double* __restrict yp = y.data();
  const double* __restrict xp = x.data();
  for (std::size_t i = 0; i < n; ++i) yp[i] += alpha * xp[i];
}

Vector AffineForward(const Matrix& w, std::span<const double> x,
                     std::span<const double> b) {
  if (w.cols() != x.size() || w.rows() != b.size()) {
    throw ShapeError("affine: W is " + w.ShapeString() + ", x has length " +
                     std::to_string(x.size()) + ", b has length " +
                     std::to_string(b.size()));
  }
  Vector y(w.rows());
  for (std::size_t o = 0; o < w.rows(); ++o) y[o] = Dot(w.row(o), x) + b[o];
  return y;
}

void AffineBackward(const Matrix& w, std::span<const double> x,
                    std::span<const double> grad_out, Matrix* grad_w,
                    std::span<double> grad_b, std::span<double> grad_x) {
  if (w.cols() != x.size() || w.rows() != grad_out.size()) {
    throw ShapeError("affine backward: W is " + w.ShapeString() +
                     ", x has length " + std::to_string(x.size()) +
                     ", upstream has length " +
                     std::to_string(grad_out.size()));
  }
  if (grad_w != nullptr && !grad_w->SameShape(w)) {
    throw ShapeError("affine backward: gradient buffer " +
                     grad_w->ShapeString() + " vs W " + w.ShapeString());
  }
  for (std::size_t o = 0; o < w.rows(); ++o) {
    const double g = grad_out[o];
    if (g == 0.0) continue;
    if (grad_w != nullptr) Axpy(g, x, grad_w->row(o));
    if (!grad_b.empty()) grad_b[o] += g;
    if (!grad_x.empty()) Axpy(g, w.row(o), grad_x);
  }
}

Vector LeakyRelu(std::span<const double> x, double slope) {
  Vector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
  }
  return y;
}

void LeakyReluBackward(std::span<const double> pre, double slope,
                       std::span<double> grad) {
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (!(pre[i] > 0.0)) grad[i] *= slope;
  }
}

Vector Softmax(std::span<const double> z) {
  if (z.empty()) throw DomainError("softmax of an empty vector");
  const double shift = *std::max_element(z.begin(), z.end());
  Vector p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - shift);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

Vector MaskedSoftmax(std::span<const double> z, const Mask& mask) {
  if (z.size() != mask.size()) {
    throw ShapeError("masked softmax: " + std::to_string(z.size()) +
                     " logits vs mask of length " +
                     std::to_string(mask.size()));
  }
  Vector p(z.size(), 0.0);
  double shift = -INFINITY;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mask[i]) shift = std::max(shift, z[i]);
  }
  if (shift == -INFINITY) return p;
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!mask[i]) continue;
    p[i] = std::exp(z[i] - shift);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

Vector SoftmaxBackward(std::span<const double> p,
                       std::span<const double> grad_p) {
  if (p.size() != grad_p.size()) {
    throw ShapeError("softmax backward: length mismatch");
  }
  const double inner = Dot(p, grad_p);
  Vector grad_z(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    grad_z[i] = p[i] * (grad_p[i] - inner);
  }
  return grad_z;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double ClampProbability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

std::size_t FfnParams::input_width() const {
  return layers.empty() ? 0 : layers.front().weight.value.cols();
}

std::size_t FfnParams::output_width() const {
  return layers.empty() ? 0 : layers.back().weight.value.rows();
}

std::vector<Param*> FfnParams::Parameters() {
  std::vector<Param*> out;
  for (auto& layer : layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

void XavierUniform(Matrix& m, std::size_t fan_in, std::size_t fan_out,
                   Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : m.values()) v = UniformReal(rng, -limit, limit);
}

FfnParams MakeFfn(std::string_view name, const std::vector<std::size_t>& widths,
                  bool activate_output, Rng& rng, double slope) {
  if (widths.size() < 2) throw ShapeError("an FFN needs at least one layer");
  FfnParams p;
  p.slope = slope;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const std::string prefix = std::string(name) + ".l" + std::to_string(k);
    FfnLayer layer{Param(prefix + ".w", widths[k + 1], widths[k]),
                   Param(prefix + ".b", 1, widths[k + 1]),
                   activate_output || k + 2 < widths.size()};
    XavierUniform(layer.weight.value, widths[k], widths[k + 1], rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void ValidateFfn(const FfnParams& p) {
  if (p.layers.empty()) throw ShapeError("FFN has no layers");
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const auto& l = p.layers[k];
    if (l.bias.value.cols() != l.weight.value.rows()) {
      throw ShapeError("FFN layer " + std::to_string(k) + ": weight " +
                       l.weight.value.ShapeString() + " vs bias " +
                       l.bias.value.ShapeString());
    }
    if (k + 1 < p.layers.size() &&
        l.weight.value.rows() != p.layers[k + 1].weight.value.cols()) {
      throw ShapeError("FFN layer " + std::to_string(k) + " output " +
                       l.weight.value.ShapeString() +
                       " does not chain into layer " + std::to_string(k + 1) +
                       " " + p.layers[k + 1].weight.value.ShapeString());
    }
  }
}

Vector FfnForward(const FfnParams& p, std::span<const double> x,
                  FfnCache* cache) {
  if (cache != nullptr) {
    cache->owner = &p;
    cache->inputs.clear();
    cache->pre.clear();
  }
  Vector h(x.begin(), x.end());
  for (const auto& layer : p.layers) {
    Vector z = AffineForward(layer.weight.value, h, layer.bias.value.values());
    Vector out = layer.activation ? LeakyRelu(z, p.slope) : z;
    if (cache != nullptr) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(std::move(z));
    }
    h = std::move(out);
  }
  return h;
}

Vector FfnBackward(FfnParams& p, const FfnCache& cache,
                   std::span<const double> grad_out) {
  if (cache.owner != &p || cache.inputs.size() != p.layers.size()) {
    throw UsageError("FFN backward called with a cache from another forward");
  }
  if (grad_out.size() != p.output_width()) {
    throw ShapeError("FFN backward: upstream length " +
                     std::to_string(grad_out.size()) + " vs output width " +
                     std::to_string(p.output_width()));
  }
  Vector g(grad_out.begin(), grad_out.end());
  for (std::size_t k = p.layers.size(); k-- > 0;) {
    auto& layer = p.layers[k];
    if (cache.inputs[k].size() != layer.weight.value.cols()) {
      throw UsageError("FFN backward: cache shapes do not match parameters");
    }
    if (layer.activation) LeakyReluBackward(cache.pre[k], p.slope, g);
    Vector gx(layer.weight.value.cols(), 0.0);
    AffineBackward(layer.weight.value, cache.inputs[k], g, &layer.weight.grad,
                   layer.bias.grad.values(), gx);
    g = std::move(gx);
  }
  return g;
}

AdamState::AdamState(const std::vector<Param*>& params, AdamOptions options)
    : options_(options) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Param* p : params) {
    m_.emplace_back(p->value.rows(), p->value.cols());
    v_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void AdamState::Step(const std::vector<Param*>& params) {
  if (params.size() != m_.size()) {
    throw ShapeError("adam: " + std::to_string(params.size()) +
                     " parameters vs " + std::to_string(m_.size()) +
                     " moment buffers");
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.learning_rate;
  const double l2 = options_.l2;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    if (!p.value.SameShape(m_[k]) || !p.grad.SameShape(p.value)) {
      throw ShapeError("adam: parameter " + p.name + " is " +
                       p.value.ShapeString() + ", gradient " +
                       p.grad.ShapeString() + ", moments " +
                       m_[k].ShapeString());
    }
    if (!p.trainable) continue;
    auto value = p.value.values();
    auto grad = p.grad.values();
    auto m = m_[k].values();
    auto v = v_[k].values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i] + l2 * value[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

Vector FiniteDifferenceGradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  Vector probe(x.begin(), x.end());
  Vector grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

Vector DropoutMask(std::size_t len, double ratio, Rng& rng, bool training) {
  if (!(ratio >= 0.0) || ratio >= 1.0) {
    throw DomainError("dropout ratio must lie in [0, 1), got " +
                      std::to_string(ratio));
  }
  Vector mask(len, 1.0);
  if (!training || ratio == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - ratio);
  for (double& m : mask) {
    m = UniformReal(rng, 0.0, 1.0) < ratio ? 0.0 : keep_scale;
  }
  return mask;
}

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t root, std::string_view purpose) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(root ^ SplitMix64(h));
}

double UniformReal(Rng& rng, double lo, double hi) {
  // 53 random mantissa bits -> [0, 1).
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double StandardNormal(Rng& rng) {
  // Box-Muller; one variate per call keeps the stream stateless.
  double u1 = UniformReal(rng, 0.0, 1.0);
  while (u1 <= 0.0) u1 = UniformReal(rng, 0.0, 1.0);
  const double u2 = UniformReal(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t UniformIndex(Rng& rng, std::size_t n) {
  if (n == 0) throw DomainError("UniformIndex over an empty range");
  // Rejection sampling removes modulo bias.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return static_cast<std::size_t>(r % bound);
}

}  // namespace pigat
