#include "beamrl/replay_buffer.hpp"

#include <algorithm>

#include "beamrl/errors.hpp"

namespace beamrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) detail::throw_config("replay buffer capacity must be >= 1");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
    if (data_.size() < capacity_) {
        data_.push_back(t);
    } else {
        data_[head_] = t;
        head_ = (head_ + 1) % capacity_;
    }
    ++pushed_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch) {
    require(batch <= data_.size(), "ReplayBuffer::sample: batch larger than buffer");
    const std::size_t n = data_.size();
    std::vector<std::size_t> picked;
    picked.reserve(batch);
    for (std::size_t j = n - batch; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, j);
        const std::size_t k = pick(rng_);
        if (std::find(picked.begin(), picked.end(), k) == picked.end())
            picked.push_back(k);
        else
            picked.push_back(j);
    }
    std::vector<Transition> out;
    out.reserve(batch);
    for (std::size_t k : picked) out.push_back(data_[k]);
    return out;
}

std::vector<Transition> ReplayBuffer::contents() const {
    std::vector<Transition> out;
    out.reserve(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out.push_back(data_[(head_ + i) % data_.size()]);
    return out;
}

}  // namespace beamrl
