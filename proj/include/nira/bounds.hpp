#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "nira/affine.hpp"
#include "nira/errors.hpp"
#include "nira/geometry.hpp"
#include "nira/inr.hpp"
#include "nira/paf.hpp"

namespace nira {

enum class BoundMethod { UP, RaFull, RaFixed, RaTruncate, RaAppend, RaUa, Dense };

inline constexpr BoundMethod all_methods[] = {BoundMethod::UP,       BoundMethod::RaFull, BoundMethod::RaFixed,
                                              BoundMethod::RaTruncate, BoundMethod::RaAppend, BoundMethod::RaUa,
                                              BoundMethod::Dense};

inline std::string_view to_string(BoundMethod m)
{
    switch (m) {
    case BoundMethod::UP: return "up";
    case BoundMethod::RaFull: return "ra-full";
    case BoundMethod::RaFixed: return "ra-fixed";
    case BoundMethod::RaTruncate: return "ra-truncate";
    case BoundMethod::RaAppend: return "ra-append";
    case BoundMethod::RaUa: return "ra-ua";
    case BoundMethod::Dense: return "dense";
    }
    return "?";
}

inline BoundMethod parse_method(std::string_view s)
{
    for (BoundMethod m : all_methods)
        if (to_string(m) == s) return m;
    throw ParseError("unknown method '" + std::string(s) + "'");
}

inline bool is_range_analysis(BoundMethod m)
{
    return m == BoundMethod::RaFull || m == BoundMethod::RaFixed || m == BoundMethod::RaTruncate ||
           m == BoundMethod::RaAppend;
}

inline bool uses_soft_bound(BoundMethod m) { return m == BoundMethod::UP || m == BoundMethod::RaUa; }

struct BoundConfig {
    BoundMethod method = BoundMethod::UP;
    double t = 5.0;             // confidence level for soft bounds
    std::size_t ra_limit = 0;   // Truncate k / Append budget; 0 selects input_dim + 16
    BoundMethod ra_ua_inner = BoundMethod::RaFull;

    std::size_t resolved_limit(std::size_t input_dim) const
    {
        return ra_limit ? ra_limit : RaVariant::default_limit(input_dim);
    }

    RaVariant variant_for(BoundMethod m, std::size_t input_dim) const
    {
        switch (m) {
        case BoundMethod::RaFixed: return RaVariant::fixed();
        case BoundMethod::RaTruncate: return RaVariant::truncate(resolved_limit(input_dim));
        case BoundMethod::RaAppend: return RaVariant::append(resolved_limit(input_dim));
        default: return RaVariant::full();
        }
    }

    void validate(std::size_t input_dim) const
    {
        if (uses_soft_bound(method) && !(t > 0.0)) throw ContractError("confidence level t must be positive");
        if (ra_limit != 0 && ra_limit < input_dim)
            throw ContractError("RA coefficient limit must be at least the input dimension");
        if (!is_range_analysis(ra_ua_inner)) throw ContractError("RA-UA inner variant must be a range-analysis method");
    }
};

// Bound on the network value over a region, in data units. Dense has no region bound.
inline Interval region_bound(const MlpNetwork& net, const AffineRegion& region, const BoundConfig& cfg)
{
    switch (cfg.method) {
    case BoundMethod::UP: return soft_bound(up_output_estimate(net, region), cfg.t);
    case BoundMethod::RaUa:
        return soft_bound(ra_ua_estimate(net, region, cfg.variant_for(cfg.ra_ua_inner, net.input_dim)), cfg.t);
    case BoundMethod::Dense: throw ContractError("region_bound: dense method has no region bound");
    default: return ra_output_range(net, region, cfg.variant_for(cfg.method, net.input_dim));
    }
}

} // namespace nira
