#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "nira/detail/kernels.hpp"
#include "nira/errors.hpp"

namespace nira {

enum class Activation { Sine, ReLU, ELU };

inline std::string_view to_string(Activation a)
{
    switch (a) {
    case Activation::Sine: return "sine";
    case Activation::ReLU: return "relu";
    case Activation::ELU: return "elu";
    }
    return "?";
}

inline Activation parse_activation(std::string_view s)
{
    if (s == "sine" || s == "sin") return Activation::Sine;
    if (s == "relu") return Activation::ReLU;
    if (s == "elu") return Activation::ELU;
    throw ParseError("unknown activation '" + std::string(s) + "'");
}

// ELU is the alpha = 1 variant: x for x > 0, e^x - 1 otherwise.
inline double activate(Activation a, double x)
{
    switch (a) {
    case Activation::Sine: return detail::fast_sin(x);
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::ELU: return detail::elu(x);
    }
    return x;
}

// Derivative used by the trainer; ReLU'(0) is taken as 0.
inline double activate_derivative(Activation a, double x)
{
    switch (a) {
    case Activation::Sine: return std::cos(x);
    case Activation::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case Activation::ELU: return x > 0.0 ? 1.0 : detail::exp_core_nonpositive(x);
    }
    return 1.0;
}

// In-place activation over a contiguous buffer. Results match activate() bit for bit.
inline void activate_inplace(Activation a, double* v, std::size_t n)
{
    switch (a) {
    case Activation::Sine: {
        std::size_t wide = 0;
        for (std::size_t i = 0; i < n; ++i) wide += std::fabs(v[i]) > detail::sin_reduction_limit;
        if (wide) {
            for (std::size_t i = 0; i < n; ++i) v[i] = detail::fast_sin(v[i]);
        } else {
            for (std::size_t i = 0; i < n; ++i) v[i] = detail::sin_core(v[i]);
        }
        break;
    }
    case Activation::ReLU:
        for (std::size_t i = 0; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
        break;
    case Activation::ELU:
        for (std::size_t i = 0; i < n; ++i) {
            const double x = v[i];
            const bool pos = x > 0.0;
            const double e = detail::exp_core_nonpositive(detail::select(pos, 0.0, x)) - 1.0;
            v[i] = detail::select(pos, x, e);
        }
        break;
    }
}

} // namespace nira
