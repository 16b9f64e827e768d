#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "setdetect/errors.hpp"

namespace setdetect {

/// Dense batch x time x channels activation block, templated on the scalar so
/// the production engine runs in 32-bit while gradient checking runs a
/// double-precision shadow of the same code.
///
/// Storage is channel-major per sample ([b][c][t], time fastest) so temporal
/// convolutions and pooling walk contiguous memory.
template <typename T>
class Tensor3 {
  public:
    Tensor3() = default;
    Tensor3(std::size_t batch, std::size_t time, std::size_t channels, T fill = T(0))
        : batch_(batch), time_(time), channels_(channels), data_(batch * time * channels, fill) {
        if (batch == 0 || time == 0 || channels == 0)
            throw ShapeMismatch("Tensor3 dimensions must be positive");
    }

    std::size_t batch() const { return batch_; }
    std::size_t time() const { return time_; }
    std::size_t channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }

    T at(std::size_t b, std::size_t t, std::size_t c) const { return data_[(b * channels_ + c) * time_ + t]; }
    T& at(std::size_t b, std::size_t t, std::size_t c) { return data_[(b * channels_ + c) * time_ + t]; }

    /// Pointer to the length-time() row of sample b, channel c.
    const T* row(std::size_t b, std::size_t c) const { return data_.data() + (b * channels_ + c) * time_; }
    T* row(std::size_t b, std::size_t c) { return data_.data() + (b * channels_ + c) * time_; }

    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }

    bool same_shape(const Tensor3& o) const {
        return batch_ == o.batch_ && time_ == o.time_ && channels_ == o.channels_;
    }

    /// NaN/Inf anywhere is a hard error; called at loss boundaries rather
    /// than per-op.
    void check_finite(const std::string& where) const {
        for (const T& v : data_)
            if (!std::isfinite(static_cast<double>(v)))
                throw NonFiniteLoss("non-finite value in " + where);
    }

  private:
    std::size_t batch_ = 0, time_ = 0, channels_ = 0;
    std::vector<T> data_;
};

}  // namespace setdetect
