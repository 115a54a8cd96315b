#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace skillforge {

using ValueVector = std::vector<double>;

/// Sparse vector with strictly increasing indices. Observations are mostly
/// zeros (one-hot tile channels), so the first layer only touches the rows of
/// nonzero inputs.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  static SparseVector from_dense(std::span<const double> dense);

  /// Appends an entry; indices must increase and stay below dim(). Zero
  /// values are dropped.
  void push(std::uint32_t index, double value);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nonzeros() const noexcept { return indices_.size(); }
  std::span<const std::uint32_t> indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> to_dense() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

enum class Activation : std::uint8_t { relu = 0, identity = 1 };

/// Fully connected layer. Weights are stored row-major with one row per
/// input unit: weights[i * outputs + o] connects input i to output o.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::identity;

  static DenseLayer zeros(std::size_t inputs, std::size_t outputs, Activation activation);
  /// U(-1/sqrt(inputs), 1/sqrt(inputs)) for weights and biases.
  static DenseLayer uniform_init(std::size_t inputs, std::size_t outputs, Activation activation,
                                 std::uint64_t seed);

  std::size_t parameter_count() const noexcept { return weights.size() + bias.size(); }
  bool operator==(const DenseLayer&) const = default;
};

struct LayerGradient {
  std::vector<double> weights;
  std::vector<double> bias;
  /// Input layers fed by sparse observations record which weight rows were
  /// written; all other rows are exactly zero.
  bool row_sparse = false;
  std::vector<std::uint32_t> rows;
  std::vector<std::uint8_t> row_mark;

  static LayerGradient zeros_like(const DenseLayer& layer, bool row_sparse = false);
  /// Resets to all-zero, touching only written rows when row_sparse.
  void clear();
};

struct RmsPropConfig {
  double decay = 0.95;
  double epsilon = 1e-6;
};

/// Per-parameter running mean of squared gradients:
///   ms <- decay * ms + (1 - decay) * g^2
///   p  <- p - lr * g / (sqrt(ms) + epsilon)
/// For row-sparse gradients untouched rows have g = 0, so their parameters
/// do not move; their accumulators are decayed lazily the next time the row
/// is written.
struct RmsPropState {
  std::vector<double> weights;
  std::vector<double> bias;
  std::uint64_t updates = 0;
  std::vector<std::uint64_t> row_updated;

  static RmsPropState for_layer(const DenseLayer& layer);
  void apply(DenseLayer& layer, const LayerGradient& grad, double lr, const RmsPropConfig& cfg);
};

/// Post-activation outputs of every layer for one forward pass.
struct ForwardTrace {
  std::vector<std::vector<double>> outputs;
};

/// Layer-stack kernels shared by single- and multi-head networks. The stack
/// is given as pointers so a trunk and a selected head can be chained without
/// copying.
std::vector<double> forward_stack(std::span<const DenseLayer* const> stack, const SparseVector& input,
                                  ForwardTrace* trace = nullptr);
/// Accumulates dLoss/dParams into `grads` given dLoss/dOutput of the last
/// layer. Gradients with respect to the input are not computed.
void backward_stack(std::span<const DenseLayer* const> stack, const SparseVector& input,
                    const ForwardTrace& trace, std::span<const double> grad_output,
                    std::span<LayerGradient* const> grads);

/// Minibatch for the TD regression: only output target_indices[i] of sample i
/// is regressed onto target_values[i].
struct Batch {
  std::vector<SparseVector> inputs;
  std::vector<double> target_values;
  std::vector<std::size_t> target_indices;

  std::size_t size() const noexcept { return inputs.size(); }
};

class QNetwork {
 public:
  QNetwork() = default;
  explicit QNetwork(std::vector<DenseLayer> layers, RmsPropConfig optimizer = {});

  /// input -> hidden... (relu) -> output (identity), uniformly initialized.
  static QNetwork mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t output_dim,
                      std::uint64_t seed, RmsPropConfig optimizer = {});

  std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().inputs; }
  std::size_t output_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().outputs; }
  std::span<const DenseLayer> layers() const noexcept { return layers_; }
  const RmsPropConfig& optimizer_config() const noexcept { return opt_cfg_; }

  ValueVector forward(const SparseVector& obs) const;
  ValueVector forward(std::span<const double> obs) const;

  struct Gradients {
    double loss = 0.0;
    std::vector<LayerGradient> layers;
  };
  /// Mean squared TD error of the batch and its gradient; no state change.
  Gradients gradients(const Batch& batch) const;

  /// One RMSProp step on the batch. Returns the pre-update loss.
  /// Throws TrainingDiverged on a non-finite loss or gradient.
  double train_step(const Batch& batch, double lr);

  /// Flat parameter view: per layer, weights then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  std::size_t parameter_count() const noexcept;

  bool same_parameters(const QNetwork& other) const { return layers_ == other.layers_; }

 private:
  std::vector<const DenseLayer*> stack() const;
  void accumulate(const Batch& batch, Gradients& out) const;

  std::vector<DenseLayer> layers_;
  std::vector<RmsPropState> opt_state_;
  RmsPropConfig opt_cfg_;
  Gradients workspace_;
};

/// Deep copy used as the frozen target network.
QNetwork sync_target(const QNetwork& net);

/// Shared trunk with one output layer per task. Head h on top of the trunk is
/// a complete Q-network for task h.
class MultiHeadNetwork {
 public:
  MultiHeadNetwork() = default;
  MultiHeadNetwork(std::vector<DenseLayer> trunk, std::vector<DenseLayer> heads, RmsPropConfig optimizer = {});

  static MultiHeadNetwork make(std::size_t input_dim, std::span<const std::size_t> hidden,
                               std::size_t output_dim, std::size_t heads, std::uint64_t seed,
                               RmsPropConfig optimizer = {});

  std::size_t head_count() const noexcept { return heads_.size(); }
  std::size_t input_dim() const noexcept { return trunk_.empty() ? 0 : trunk_.front().inputs; }
  std::size_t output_dim() const noexcept { return heads_.empty() ? 0 : heads_.front().outputs; }
  std::span<const DenseLayer> trunk() const noexcept { return trunk_; }
  std::span<const DenseLayer> heads() const noexcept { return heads_; }

  ValueVector forward(std::size_t head, const SparseVector& obs) const;

  /// Distillation loss over a batch for one head: mean over samples of
  /// ||softmax_tau(teacher_q) - student||^2. Gradients for the trunk layers
  /// followed by the selected head.
  struct Gradients {
    double loss = 0.0;
    std::vector<LayerGradient> trunk;
    LayerGradient head;
  };
  Gradients distill_gradients(std::size_t head, std::span<const SparseVector> inputs,
                              std::span<const ValueVector> teacher_q, double tau) const;

  /// Updates the trunk and head `head` only; other heads and their optimizer
  /// state are untouched. Returns the pre-update loss.
  double distill_step(std::size_t head, std::span<const SparseVector> inputs,
                      std::span<const ValueVector> teacher_q, double tau, double lr);

  /// Extracts head h as a standalone network (trunk layers + head layer).
  QNetwork head_network(std::size_t head) const;

  bool same_parameters(const MultiHeadNetwork& other) const {
    return trunk_ == other.trunk_ && heads_ == other.heads_;
  }

 private:
  std::vector<const DenseLayer*> stack(std::size_t head) const;

  std::vector<DenseLayer> trunk_;
  std::vector<DenseLayer> heads_;
  std::vector<RmsPropState> trunk_opt_;
  std::vector<RmsPropState> head_opt_;
  RmsPropConfig opt_cfg_;
};

/// exp(v_i / tau) / sum_j exp(v_j / tau), max-subtracted.
ValueVector softmax_tau(std::span<const double> values, double tau);

struct DistillLoss {
  double loss = 0.0;
  ValueVector grad;  // d loss / d student_out
};
DistillLoss distill_loss_and_grad(std::span<const double> student_out, std::span<const double> teacher_q,
                                  double tau);

std::size_t argmax(std::span<const double> values);

}  // namespace skillforge
