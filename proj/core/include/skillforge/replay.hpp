#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "skillforge/gridcraft.hpp"
#include "skillforge/rng.hpp"

namespace skillforge {

/// Primitive (duration 1) or skill transition. For skills `reward` is the
/// discounted in-skill return and `next` the observation at s_{t+k}.
struct Transition {
  Observation state;
  std::size_t action = 0;
  double reward = 0.0;
  Observation next;
  bool terminal = false;
  int duration = 1;
};

/// Fixed-capacity ring with FIFO eviction and uniform sampling with
/// replacement. Holds primitive and skill tuples side by side.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  /// n uniform draws with replacement. Throws ContractViolation if empty.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return items_.empty(); }
  std::uint64_t insertions() const noexcept { return insertions_; }

  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

  /// One line per transition: action duration reward terminal nnz(state) nnz(next).
  void dump(const std::filesystem::path& path) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::uint64_t insertions_ = 0;
};

}  // namespace skillforge
