#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mixsim {

// Dense unit x round table. Storage is column-major so that one round
// (all units at a fixed t) is a contiguous span.
template <class T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept {
        assert(r < rows_ && c < cols_);
        return data_[c * rows_ + r];
    }
    const T& operator()(std::size_t r, std::size_t c) const noexcept {
        assert(r < rows_ && c < cols_);
        return data_[c * rows_ + r];
    }

    std::span<T> col(std::size_t c) noexcept { return {data_.data() + c * rows_, rows_}; }
    std::span<const T> col(std::size_t c) const noexcept {
        return {data_.data() + c * rows_, rows_};
    }

    void set_col(std::size_t c, std::span<const T> values) {
        assert(values.size() == rows_);
        std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(c * rows_));
    }

    const std::vector<T>& data() const noexcept { return data_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

}  // namespace mixsim
