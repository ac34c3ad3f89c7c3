#pragma once

#include <cassert>
#include <utility>
#include <variant>

namespace qfc {

/// Minimal result type holding either a value or an error.
/// Stand-in for std::expected, which is not available pre-C++23.
template <class T, class E>
class Expected {
public:
    Expected(T value) : store_(std::in_place_index<0>, std::move(value)) {}
    Expected(E error) : store_(std::in_place_index<1>, std::move(error)) {}

    bool has_value() const { return store_.index() == 0; }
    explicit operator bool() const { return has_value(); }

    T& value() {
        assert(has_value());
        return std::get<0>(store_);
    }
    const T& value() const {
        assert(has_value());
        return std::get<0>(store_);
    }

    E& error() {
        assert(!has_value());
        return std::get<1>(store_);
    }
    const E& error() const {
        assert(!has_value());
        return std::get<1>(store_);
    }

    T& operator*() { return value(); }
    const T& operator*() const { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

private:
    std::variant<T, E> store_;
};

} // namespace qfc
