#include "skillforge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skillforge/error.hpp"
#include "skillforge/rng.hpp"

namespace skillforge {

using detail::require;

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector out(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) out.push(static_cast<std::uint32_t>(i), dense[i]);
  }
  return out;
}

void SparseVector::push(std::uint32_t index, double value) {
  require(index < dim_, "SparseVector::push: index out of range");
  require(indices_.empty() || index > indices_.back(), "SparseVector::push: indices must increase");
  if (value == 0.0) return;
  indices_.push_back(index);
  values_.push_back(value);
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dim_, 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k) out[indices_[k]] = values_[k];
  return out;
}

DenseLayer DenseLayer::zeros(std::size_t inputs, std::size_t outputs, Activation activation) {
  require(inputs > 0 && outputs > 0, "DenseLayer: dimensions must be positive");
  return DenseLayer{inputs, outputs, std::vector<double>(inputs * outputs, 0.0),
                    std::vector<double>(outputs, 0.0), activation};
}

DenseLayer DenseLayer::uniform_init(std::size_t inputs, std::size_t outputs, Activation activation,
                                    std::uint64_t seed) {
  DenseLayer layer = zeros(inputs, outputs, activation);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(inputs));
  for (double& w : layer.weights) w = uniform_real(rng, -bound, bound);
  for (double& b : layer.bias) b = uniform_real(rng, -bound, bound);
  return layer;
}

LayerGradient LayerGradient::zeros_like(const DenseLayer& layer, bool row_sparse) {
  LayerGradient g;
  g.weights.assign(layer.weights.size(), 0.0);
  g.bias.assign(layer.bias.size(), 0.0);
  g.row_sparse = row_sparse;
  if (row_sparse) g.row_mark.assign(layer.inputs, 0);
  return g;
}

void LayerGradient::clear() {
  std::fill(bias.begin(), bias.end(), 0.0);
  if (!row_sparse) {
    std::fill(weights.begin(), weights.end(), 0.0);
    return;
  }
  const std::size_t width = bias.size();
  for (std::uint32_t r : rows) {
    std::fill_n(weights.begin() + static_cast<std::ptrdiff_t>(r * width), width, 0.0);
    row_mark[r] = 0;
  }
  rows.clear();
}

RmsPropState RmsPropState::for_layer(const DenseLayer& layer) {
  RmsPropState s;
  s.weights.assign(layer.weights.size(), 0.0);
  s.bias.assign(layer.bias.size(), 0.0);
  s.row_updated.assign(layer.inputs, 0);
  return s;
}

namespace {

void rmsprop_update(double* __restrict params, const double* __restrict grads, double* __restrict ms,
                    std::size_t n, double lr, const RmsPropConfig& cfg) {
  const double keep = cfg.decay;
  const double mix = 1.0 - cfg.decay;
  const double eps = cfg.epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    const double m = keep * ms[i] + mix * g * g;
    ms[i] = m;
    params[i] -= lr * g / (std::sqrt(m) + eps);
  }
}

// y += a * x
inline void axpy(double* __restrict y, const double* __restrict x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

inline double dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

bool all_finite(const double* v, std::size_t n) {
  // Any inf or NaN turns the sum into NaN.
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += v[i] * 0.0;
  return acc == 0.0;
}

void check_finite(const LayerGradient& g) {
  bool ok = all_finite(g.bias.data(), g.bias.size());
  if (g.row_sparse) {
    const std::size_t width = g.bias.size();
    for (std::uint32_t r : g.rows) ok = ok && all_finite(g.weights.data() + r * width, width);
  } else {
    ok = ok && all_finite(g.weights.data(), g.weights.size());
  }
  if (!ok) throw TrainingDiverged("non-finite gradient");
}

void apply_activation(Activation act, std::vector<double>& v) {
  if (act == Activation::relu) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
  }
}

void validate_stack(std::span<const DenseLayer> layers) {
  require(!layers.empty(), "network needs at least one layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    require(l.inputs > 0 && l.outputs > 0, "layer dimensions must be positive");
    require(l.weights.size() == l.inputs * l.outputs && l.bias.size() == l.outputs,
            "layer parameter arrays do not match its shape");
    if (i + 1 < layers.size()) {
      require(l.outputs == layers[i + 1].inputs, "consecutive layer dimensions are inconsistent");
    }
  }
}

std::vector<LayerGradient> gradient_buffers(std::span<const DenseLayer* const> stack) {
  std::vector<LayerGradient> out;
  out.reserve(stack.size());
  for (std::size_t l = 0; l < stack.size(); ++l) out.push_back(LayerGradient::zeros_like(*stack[l], l == 0));
  return out;
}

}  // namespace

void RmsPropState::apply(DenseLayer& layer, const LayerGradient& grad, double lr, const RmsPropConfig& cfg) {
  ++updates;
  rmsprop_update(layer.bias.data(), grad.bias.data(), bias.data(), bias.size(), lr, cfg);
  if (!grad.row_sparse) {
    rmsprop_update(layer.weights.data(), grad.weights.data(), weights.data(), weights.size(), lr, cfg);
    return;
  }
  const std::size_t width = layer.outputs;
  for (std::uint32_t r : grad.rows) {
    const std::uint64_t skipped = updates - row_updated[r] - 1;
    double* ms = weights.data() + r * width;
    if (skipped > 0) {
      const double factor = std::pow(cfg.decay, static_cast<double>(skipped));
      for (std::size_t o = 0; o < width; ++o) ms[o] *= factor;
    }
    row_updated[r] = updates;
    rmsprop_update(layer.weights.data() + r * width, grad.weights.data() + r * width, ms, width, lr, cfg);
  }
}

std::vector<double> forward_stack(std::span<const DenseLayer* const> stack, const SparseVector& input,
                                  ForwardTrace* trace) {
  require(!stack.empty(), "forward: empty layer stack");
  require(input.dim() == stack.front()->inputs, "forward: observation length does not match input_dim");
  if (trace) trace->outputs.resize(stack.size());

  // First layer: accumulate rows of nonzero inputs only.
  const DenseLayer& first = *stack.front();
  std::vector<double> h(first.bias);
  const auto idx = input.indices();
  const auto val = input.values();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    axpy(h.data(), first.weights.data() + static_cast<std::size_t>(idx[k]) * first.outputs, val[k], first.outputs);
  }
  apply_activation(first.activation, h);

  for (std::size_t l = 1; l < stack.size(); ++l) {
    const DenseLayer& layer = *stack[l];
    std::vector<double> next(layer.bias);
    for (std::size_t i = 0; i < layer.inputs; ++i) {
      if (h[i] == 0.0) continue;
      axpy(next.data(), layer.weights.data() + i * layer.outputs, h[i], layer.outputs);
    }
    apply_activation(layer.activation, next);
    if (trace) trace->outputs[l - 1] = std::move(h);
    h = std::move(next);
  }
  if (trace) trace->outputs.back() = h;
  return h;
}

void backward_stack(std::span<const DenseLayer* const> stack, const SparseVector& input, const ForwardTrace& trace,
                    std::span<const double> grad_output, std::span<LayerGradient* const> grads) {
  require(grads.size() == stack.size() && trace.outputs.size() == stack.size(), "backward: stack size mismatch");
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  for (std::size_t l = stack.size(); l-- > 0;) {
    const DenseLayer& layer = *stack[l];
    LayerGradient& g = *grads[l];
    const std::vector<double>& out = trace.outputs[l];
    if (layer.activation == Activation::relu) {
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        if (out[o] <= 0.0) delta[o] = 0.0;
      }
    }
    for (std::size_t o = 0; o < layer.outputs; ++o) g.bias[o] += delta[o];

    if (l == 0) {
      const auto idx = input.indices();
      const auto val = input.values();
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const std::uint32_t r = idx[k];
        if (g.row_sparse && !g.row_mark[r]) {
          g.row_mark[r] = 1;
          g.rows.push_back(r);
        }
        axpy(g.weights.data() + static_cast<std::size_t>(r) * layer.outputs, delta.data(), val[k], layer.outputs);
      }
      break;
    }

    const std::vector<double>& in = trace.outputs[l - 1];
    std::vector<double> prev(layer.inputs, 0.0);
    for (std::size_t i = 0; i < layer.inputs; ++i) {
      prev[i] = dot(layer.weights.data() + i * layer.outputs, delta.data(), layer.outputs);
      if (in[i] == 0.0) continue;
      axpy(g.weights.data() + i * layer.outputs, delta.data(), in[i], layer.outputs);
    }
    delta = std::move(prev);
  }
}

QNetwork::QNetwork(std::vector<DenseLayer> layers, RmsPropConfig optimizer)
    : layers_(std::move(layers)), opt_cfg_(optimizer) {
  validate_stack(layers_);
  opt_state_.reserve(layers_.size());
  for (const auto& l : layers_) opt_state_.push_back(RmsPropState::for_layer(l));
}

QNetwork QNetwork::mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t output_dim,
                       std::uint64_t seed, RmsPropConfig optimizer) {
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  std::uint64_t stream = 0;
  for (std::size_t h : hidden) {
    layers.push_back(DenseLayer::uniform_init(in, h, Activation::relu, derive_seed(seed, stream++)));
    in = h;
  }
  layers.push_back(DenseLayer::uniform_init(in, output_dim, Activation::identity, derive_seed(seed, stream)));
  return QNetwork(std::move(layers), optimizer);
}

std::vector<const DenseLayer*> QNetwork::stack() const {
  std::vector<const DenseLayer*> s;
  s.reserve(layers_.size());
  for (const auto& l : layers_) s.push_back(&l);
  return s;
}

ValueVector QNetwork::forward(const SparseVector& obs) const { return forward_stack(stack(), obs); }

ValueVector QNetwork::forward(std::span<const double> obs) const {
  require(obs.size() == input_dim(), "forward: observation length does not match input_dim");
  return forward_stack(stack(), SparseVector::from_dense(obs));
}

void QNetwork::accumulate(const Batch& batch, Gradients& out) const {
  const std::size_t n = batch.size();
  require(n >= 1, "train_step: empty batch");
  require(batch.target_values.size() == n && batch.target_indices.size() == n,
          "train_step: batch sequences differ in length");
  std::vector<LayerGradient*> grad_ptrs;
  for (auto& g : out.layers) grad_ptrs.push_back(&g);

  const auto s = stack();
  ForwardTrace trace;
  std::vector<double> grad_out(output_dim(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = batch.target_indices[i];
    require(a < output_dim(), "train_step: target index out of range");
    const ValueVector q = forward_stack(s, batch.inputs[i], &trace);
    const double residual = q[a] - batch.target_values[i];
    out.loss += residual * residual * inv_n;
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    grad_out[a] = 2.0 * residual * inv_n;
    backward_stack(s, batch.inputs[i], trace, grad_out, grad_ptrs);
  }
}

QNetwork::Gradients QNetwork::gradients(const Batch& batch) const {
  Gradients out;
  out.layers = gradient_buffers(stack());
  accumulate(batch, out);
  return out;
}

double QNetwork::train_step(const Batch& batch, double lr) {
  require(lr > 0.0, "train_step: learning rate must be positive");
  if (workspace_.layers.size() != layers_.size()) workspace_.layers = gradient_buffers(stack());
  for (auto& g : workspace_.layers) g.clear();
  accumulate(batch, workspace_);
  if (!std::isfinite(workspace_.loss)) throw TrainingDiverged("non-finite loss");
  for (const auto& g : workspace_.layers) check_finite(g);
  for (std::size_t l = 0; l < layers_.size(); ++l) opt_state_[l].apply(layers_[l], workspace_.layers[l], lr, opt_cfg_);
  return workspace_.loss;
}

std::vector<double> QNetwork::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void QNetwork::set_parameters(std::span<const double> flat) {
  require(flat.size() == parameter_count(), "set_parameters: wrong parameter count");
  std::size_t pos = 0;
  for (auto& l : layers_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l.weights.size(), l.weights.begin());
    pos += l.weights.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l.bias.size(), l.bias.begin());
    pos += l.bias.size();
  }
}

std::size_t QNetwork::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.parameter_count();
  return n;
}

QNetwork sync_target(const QNetwork& net) { return net; }

MultiHeadNetwork::MultiHeadNetwork(std::vector<DenseLayer> trunk, std::vector<DenseLayer> heads,
                                   RmsPropConfig optimizer)
    : trunk_(std::move(trunk)), heads_(std::move(heads)), opt_cfg_(optimizer) {
  validate_stack(trunk_);
  require(!heads_.empty(), "MultiHeadNetwork: at least one head required");
  for (const auto& h : heads_) {
    validate_stack(std::span<const DenseLayer>(&h, 1));
    require(h.inputs == trunk_.back().outputs, "MultiHeadNetwork: head input does not match trunk output");
    require(h.outputs == heads_.front().outputs, "MultiHeadNetwork: heads must share output dimension");
  }
  for (const auto& l : trunk_) trunk_opt_.push_back(RmsPropState::for_layer(l));
  for (const auto& h : heads_) head_opt_.push_back(RmsPropState::for_layer(h));
}

MultiHeadNetwork MultiHeadNetwork::make(std::size_t input_dim, std::span<const std::size_t> hidden,
                                        std::size_t output_dim, std::size_t heads, std::uint64_t seed,
                                        RmsPropConfig optimizer) {
  require(!hidden.empty(), "MultiHeadNetwork: trunk needs at least one hidden layer");
  std::vector<DenseLayer> trunk;
  std::size_t in = input_dim;
  std::uint64_t stream = 0;
  for (std::size_t h : hidden) {
    trunk.push_back(DenseLayer::uniform_init(in, h, Activation::relu, derive_seed(seed, stream++)));
    in = h;
  }
  std::vector<DenseLayer> out;
  for (std::size_t k = 0; k < heads; ++k) {
    out.push_back(DenseLayer::uniform_init(in, output_dim, Activation::identity, derive_seed(seed, stream++)));
  }
  return MultiHeadNetwork(std::move(trunk), std::move(out), optimizer);
}

std::vector<const DenseLayer*> MultiHeadNetwork::stack(std::size_t head) const {
  require(head < heads_.size(), "MultiHeadNetwork: head index out of range");
  std::vector<const DenseLayer*> s;
  for (const auto& l : trunk_) s.push_back(&l);
  s.push_back(&heads_[head]);
  return s;
}

ValueVector MultiHeadNetwork::forward(std::size_t head, const SparseVector& obs) const {
  return forward_stack(stack(head), obs);
}

MultiHeadNetwork::Gradients MultiHeadNetwork::distill_gradients(std::size_t head, std::span<const SparseVector> inputs,
                                                                std::span<const ValueVector> teacher_q,
                                                                double tau) const {
  require(!inputs.empty() && inputs.size() == teacher_q.size(), "distill: batch sizes differ or are empty");
  const auto s = stack(head);
  Gradients out;
  out.trunk = gradient_buffers(std::span<const DenseLayer* const>(s).first(trunk_.size()));
  out.head = LayerGradient::zeros_like(heads_[head]);
  std::vector<LayerGradient*> ptrs;
  for (auto& g : out.trunk) ptrs.push_back(&g);
  ptrs.push_back(&out.head);

  const double inv_n = 1.0 / static_cast<double>(inputs.size());
  ForwardTrace trace;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const ValueVector student = forward_stack(s, inputs[i], &trace);
    DistillLoss dl = distill_loss_and_grad(student, teacher_q[i], tau);
    out.loss += dl.loss * inv_n;
    for (double& g : dl.grad) g *= inv_n;
    backward_stack(s, inputs[i], trace, dl.grad, ptrs);
  }
  return out;
}

double MultiHeadNetwork::distill_step(std::size_t head, std::span<const SparseVector> inputs,
                                      std::span<const ValueVector> teacher_q, double tau, double lr) {
  require(lr > 0.0, "distill_step: learning rate must be positive");
  Gradients g = distill_gradients(head, inputs, teacher_q, tau);
  if (!std::isfinite(g.loss)) throw TrainingDiverged("non-finite distillation loss");
  for (const auto& lg : g.trunk) check_finite(lg);
  check_finite(g.head);

  for (std::size_t l = 0; l < trunk_.size(); ++l) trunk_opt_[l].apply(trunk_[l], g.trunk[l], lr, opt_cfg_);
  head_opt_[head].apply(heads_[head], g.head, lr, opt_cfg_);
  return g.loss;
}

QNetwork MultiHeadNetwork::head_network(std::size_t head) const {
  require(head < heads_.size(), "MultiHeadNetwork: head index out of range");
  std::vector<DenseLayer> layers(trunk_);
  layers.push_back(heads_[head]);
  return QNetwork(std::move(layers), opt_cfg_);
}

ValueVector softmax_tau(std::span<const double> values, double tau) {
  require(tau > 0.0, "softmax_tau: temperature must be positive");
  require(!values.empty(), "softmax_tau: empty input");
  const double m = *std::max_element(values.begin(), values.end());
  ValueVector p(values.size());
  double z = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    p[i] = std::exp((values[i] - m) / tau);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

DistillLoss distill_loss_and_grad(std::span<const double> student_out, std::span<const double> teacher_q,
                                  double tau) {
  require(student_out.size() == teacher_q.size(), "distill_loss_and_grad: length mismatch");
  const ValueVector p = softmax_tau(teacher_q, tau);
  DistillLoss out;
  out.grad.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = student_out[i] - p[i];
    out.loss += d * d;
    out.grad[i] = 2.0 * d;
  }
  return out;
}

std::size_t argmax(std::span<const double> values) {
  require(!values.empty(), "argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace skillforge
