#pragma once

#include <cstddef>
#include <vector>

#include "rrl/economy.hpp"
#include "rrl/errors.hpp"
#include "rrl/rng.hpp"

namespace rrl {

// One experience tuple (s, a, r, s').
struct Transition {
    MacroState s;
    double a = 0.0;
    double r = 0.0;
    MacroState s_next;
};

// Fixed-capacity ring of transitions. Once full, the oldest entry is
// overwritten. Sampling is uniform with replacement over the current size.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw BadConfig("ReplayBuffer: zero capacity");
        data_.reserve(capacity);
    }

    void push(const Transition& t) {
        if (data_.size() < capacity_) {
            data_.push_back(t);
        } else {
            data_[next_] = t;
        }
        next_ = (next_ + 1) % capacity_;
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }

    std::size_t sample_index(Rng& rng) const {
        if (data_.empty()) throw BufferTooSmall("ReplayBuffer: empty");
        return rng.index(data_.size());
    }

    const Transition& operator[](std::size_t i) const { return data_[i]; }

    const Transition& sample(Rng& rng) const { return data_[sample_index(rng)]; }

    void clear() {
        data_.clear();
        next_ = 0;
    }

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t next_ = 0;
};

}  // namespace rrl
