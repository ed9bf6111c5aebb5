// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace espr {

namespace detail {

// Floyd & Rivest SELECT (Algorithm 489) on v[left..right], pivoting around
// a recursively selected sample when the range is large.
template <typename T, typename Less>
void fr_select(std::vector<T>& v, std::ptrdiff_t k, std::ptrdiff_t left, std::ptrdiff_t right,
               Less less) {
    while (right > left) {
        if (right - left > 600) {
            const double n = static_cast<double>(right - left + 1);
            const double i = static_cast<double>(k - left + 1);
            const double z = std::log(n);
            const double s = 0.5 * std::exp(2.0 * z / 3.0);
            const double sd = 0.5 * std::sqrt(z * s * (n - s) / n) * ((i < n / 2.0) ? -1.0 : 1.0);
            const auto new_left = std::max(left, static_cast<std::ptrdiff_t>(k - i * s / n + sd));
            const auto new_right =
                std::min(right, static_cast<std::ptrdiff_t>(k + (n - i) * s / n + sd));
            fr_select(v, k, new_left, new_right, less);
        }
        const T pivot = v[k];
        std::ptrdiff_t i = left;
        std::ptrdiff_t j = right;
        std::swap(v[left], v[k]);
        if (less(pivot, v[right])) std::swap(v[left], v[right]);
        while (i < j) {
            std::swap(v[i], v[j]);
            ++i;
            --j;
            while (less(v[i], pivot)) ++i;
            while (less(pivot, v[j])) --j;
        }
        if (!less(pivot, v[left]) && !less(v[left], pivot)) {
            std::swap(v[left], v[j]);
        } else {
            ++j;
            std::swap(v[j], v[right]);
        }
        if (j <= k) left = j + 1;
        if (k <= j) right = j - 1;
    }
}

}  // namespace detail

/// Floyd-Rivest SELECT: after the call, v[k] holds the element a full sort
/// by `less` would place there, with smaller elements left of k. Expected
/// linear time.
template <typename T, typename Less>
void floyd_rivest_select(std::vector<T>& v, std::size_t k, Less less) {
    if (v.empty() || k >= v.size()) return;
    detail::fr_select(v, static_cast<std::ptrdiff_t>(k), 0,
                      static_cast<std::ptrdiff_t>(v.size()) - 1, less);
}

/// Keeps the k best elements of v (`better` is a strict total order placing
/// the best first) in unspecified internal order; v is truncated to k.
template <typename T, typename Better>
void keep_top_k(std::vector<T>& v, std::size_t k, Better better) {
    if (v.size() <= k) return;
    if (k == 0) {
        v.clear();
        return;
    }
    floyd_rivest_select(v, k - 1, better);
    v.resize(k);
}

}  // namespace espr
