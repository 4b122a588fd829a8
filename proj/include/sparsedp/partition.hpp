#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace sparsedp {

using ClusterId = int;

inline constexpr ClusterId kUnassigned = -1;
/// Sentinel for inner partitions: the component sits in the point mass at 0.
inline constexpr ClusterId kSpike = -2;

/// One option of a categorical cluster-assignment draw. `target` is a live
/// cluster id, kUnassigned for "open a new cluster", or kSpike.
struct AssignmentOption {
  ClusterId target = kUnassigned;
  double log_weight = 0.0;
};

/// Items grouped into clusters with Chinese-restaurant bookkeeping.
///
/// Cluster ids are stable handles into a slot table: ids of live clusters do
/// not change when other clusters are created or destroyed. A cluster is
/// destroyed as soon as its last member is detached. Items may also be parked
/// in the spike sentinel, which is not a cluster and carries no payload.
template <class Payload> class Partition {
public:
  struct Detached {
    ClusterId from = kUnassigned;
    bool removed = false;
    std::optional<Payload> payload; ///< set iff the cluster was destroyed
  };

  /// Raw slot table, used for exact serialization.
  struct Raw {
    std::vector<ClusterId> assignments;
    std::vector<int> counts;
    std::vector<char> live;
    std::vector<Payload> values;
    std::vector<ClusterId> free_list;
  };

  Partition() = default;
  explicit Partition(std::size_t items) : assign_(items, kUnassigned) {}

  [[nodiscard]] std::size_t items() const noexcept { return assign_.size(); }
  [[nodiscard]] ClusterId cluster_of(std::size_t item) const { return assign_.at(item); }
  [[nodiscard]] bool is_assigned(std::size_t item) const { return assign_.at(item) != kUnassigned; }
  [[nodiscard]] std::size_t num_clusters() const noexcept { return live_; }
  [[nodiscard]] std::size_t capacity() const noexcept { return slots_.size(); }
  [[nodiscard]] std::size_t spike_count() const noexcept { return spike_; }

  [[nodiscard]] bool is_live(ClusterId id) const noexcept {
    return id >= 0 && static_cast<std::size_t>(id) < slots_.size() && slots_[id].live;
  }
  [[nodiscard]] int count(ClusterId id) const { return slot(id).count; }
  [[nodiscard]] const Payload &value(ClusterId id) const { return slot(id).value; }
  [[nodiscard]] Payload &value(ClusterId id) { return slot(id).value; }

  /// Live cluster ids in ascending order.
  [[nodiscard]] std::vector<ClusterId> live_ids() const {
    std::vector<ClusterId> out;
    out.reserve(live_);
    for (std::size_t s = 0; s < slots_.size(); ++s)
      if (slots_[s].live)
        out.push_back(static_cast<ClusterId>(s));
    return out;
  }

  [[nodiscard]] std::vector<std::size_t> members(ClusterId id) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assign_.size(); ++i)
      if (assign_[i] == id)
        out.push_back(i);
    return out;
  }

  /// Sizes of live clusters in ascending id order.
  [[nodiscard]] std::vector<int> sizes() const {
    std::vector<int> out;
    out.reserve(live_);
    for (const auto &s : slots_)
      if (s.live)
        out.push_back(s.count);
    return out;
  }

  Detached detach(std::size_t item) {
    const ClusterId from = assign_.at(item);
    if (from == kUnassigned)
      throw std::logic_error(fmt::format("detach: item {} is not assigned", item));
    assign_[item] = kUnassigned;
    Detached out;
    out.from = from;
    if (from == kSpike) {
      --spike_;
      return out;
    }
    Slot &s = slots_[from];
    if (--s.count == 0) {
      out.removed = true;
      out.payload = std::move(s.value);
      s.value = Payload{};
      s.live = false;
      --live_;
      free_.push_back(from);
    }
    return out;
  }

  void attach(std::size_t item, ClusterId target) {
    require_detached(item);
    if (!is_live(target))
      throw std::logic_error(fmt::format("attach: cluster {} is not live", target));
    ++slots_[target].count;
    assign_[item] = target;
  }

  ClusterId attach_new(std::size_t item, Payload payload) {
    require_detached(item);
    ClusterId id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
    } else {
      id = static_cast<ClusterId>(slots_.size());
      slots_.emplace_back();
    }
    Slot &s = slots_[id];
    s.live = true;
    s.count = 1;
    s.value = std::move(payload);
    ++live_;
    assign_[item] = id;
    return id;
  }

  void attach_spike(std::size_t item) {
    require_detached(item);
    assign_[item] = kSpike;
    ++spike_;
  }

  /// Checks every structural invariant; throws std::logic_error on failure.
  void validate() const {
    std::vector<int> counted(slots_.size(), 0);
    std::size_t spikes = 0;
    for (std::size_t i = 0; i < assign_.size(); ++i) {
      const ClusterId c = assign_[i];
      if (c == kSpike) {
        ++spikes;
      } else if (c != kUnassigned) {
        if (!is_live(c))
          throw std::logic_error(fmt::format("partition: item {} references dead cluster {}", i, c));
        ++counted[c];
      }
    }
    std::size_t live = 0;
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      if (slots_[s].live) {
        ++live;
        if (slots_[s].count <= 0)
          throw std::logic_error(fmt::format("partition: live cluster {} is empty", s));
      }
      if (counted[s] != slots_[s].count)
        throw std::logic_error(fmt::format("partition: cluster {} count {} but {} members", s,
                                           slots_[s].count, counted[s]));
    }
    if (live != live_ || spikes != spike_)
      throw std::logic_error("partition: cached totals out of sync");
  }

  [[nodiscard]] Raw raw() const {
    Raw r;
    r.assignments = assign_;
    r.free_list = free_;
    for (const auto &s : slots_) {
      r.counts.push_back(s.count);
      r.live.push_back(s.live ? 1 : 0);
      r.values.push_back(s.value);
    }
    return r;
  }

  static Partition from_raw(Raw r) {
    if (r.counts.size() != r.live.size() || r.counts.size() != r.values.size())
      throw std::invalid_argument("partition: inconsistent raw slot table");
    Partition p;
    p.assign_ = std::move(r.assignments);
    p.free_ = std::move(r.free_list);
    p.slots_.resize(r.counts.size());
    for (std::size_t s = 0; s < r.counts.size(); ++s) {
      p.slots_[s].count = r.counts[s];
      p.slots_[s].live = r.live[s] != 0;
      p.slots_[s].value = std::move(r.values[s]);
      if (p.slots_[s].live)
        ++p.live_;
    }
    for (ClusterId c : p.assign_)
      if (c == kSpike)
        ++p.spike_;
    p.validate();
    return p;
  }

  bool operator==(const Partition &o) const {
    if (assign_ != o.assign_ || free_ != o.free_ || slots_.size() != o.slots_.size())
      return false;
    for (std::size_t s = 0; s < slots_.size(); ++s)
      if (slots_[s].count != o.slots_[s].count || slots_[s].live != o.slots_[s].live ||
          !(slots_[s].value == o.slots_[s].value))
        return false;
    return true;
  }

private:
  struct Slot {
    int count = 0;
    bool live = false;
    Payload value{};
  };

  const Slot &slot(ClusterId id) const {
    if (!is_live(id))
      throw std::logic_error(fmt::format("partition: cluster {} is not live", id));
    return slots_[id];
  }
  Slot &slot(ClusterId id) {
    if (!is_live(id))
      throw std::logic_error(fmt::format("partition: cluster {} is not live", id));
    return slots_[id];
  }
  void require_detached(std::size_t item) const {
    if (assign_.at(item) != kUnassigned)
      throw std::logic_error(fmt::format("attach: item {} is already assigned", item));
  }

  std::vector<ClusterId> assign_;
  std::vector<Slot> slots_;
  std::vector<ClusterId> free_;
  std::size_t live_ = 0;
  std::size_t spike_ = 0;
};

/// Log probability of a set partition with the given block sizes under a
/// Chinese restaurant process with concentration `conc`.
[[nodiscard]] inline double crp_log_prob(std::span<const int> sizes, double conc) {
  if (sizes.empty())
    throw std::invalid_argument("crp_log_prob: sizes must be non-empty");
  if (!(conc > 0.0))
    throw std::invalid_argument("crp_log_prob: concentration must be positive");
  double lp = 0.0;
  int total = 0;
  for (int s : sizes) {
    if (s <= 0)
      throw std::invalid_argument("crp_log_prob: block sizes must be positive");
    lp += std::log(conc) + std::lgamma(static_cast<double>(s));
    total += s;
  }
  lp += std::lgamma(conc) - std::lgamma(conc + total);
  return lp;
}

} // namespace sparsedp
