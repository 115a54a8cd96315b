#include "skillforge/replay.hpp"

#include <fstream>

#include "skillforge/error.hpp"

namespace skillforge {

using detail::require;

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  require(t.duration >= 1, "ReplayBuffer::push: duration must be at least 1");
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
  ++insertions_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  require(!items_.empty(), "ReplayBuffer::sample: buffer is empty");
  require(n >= 1, "ReplayBuffer::sample: n must be at least 1");
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[uniform_index(rng, items_.size())]);
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  require(i < items_.size(), "ReplayBuffer::at: index out of range");
  return items_[(head_ + i) % items_.size()];
}

void ReplayBuffer::dump(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write replay dump: " + path.string());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const Transition& t = at(i);
    out << t.action << ' ' << t.duration << ' ' << t.reward << ' ' << t.terminal << ' ' << t.state.nonzeros() << ' '
        << t.next.nonzeros() << '\n';
  }
}

}  // namespace skillforge
