#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "beamrl/environment.hpp"
#include "beamrl/rng.hpp"

namespace beamrl {

struct Transition {
    StateVector state{};
    Action action{};          // continuous action or goal
    int discrete_action = -1; // index into a discrete action set, -1 when unused
    double reward = 0.0;
    StateVector next_state{};
    bool done = false;        // terminal: no bootstrap through next_state
};

/// Fixed-capacity ring buffer of transitions with uniform minibatch sampling.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void push(const Transition& t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_pushed() const { return pushed_; }
    bool empty() const { return data_.empty(); }

    /// Distinct transitions, uniformly at random (Floyd's algorithm).
    std::vector<Transition> sample(std::size_t batch);
    /// Oldest first.
    std::vector<Transition> contents() const;

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t head_ = 0;  // next slot to overwrite once full
    std::uint64_t pushed_ = 0;
    Rng rng_;
};

}  // namespace beamrl
