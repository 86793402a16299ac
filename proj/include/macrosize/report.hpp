#pragma once

// JSON forms of the reports and the fixed-precision number format used in
// CSV output.

#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "phase.hpp"
#include "sizing.hpp"

namespace macrosize {

/// 9 significant digits, "inf"/"nan" spelled out.
inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline nlohmann::json to_json(const SizeReport& r)
{
    return {{"pg", r.p_g},
            {"sigma_max", r.sigma_max},
            {"size", r.size},
            {"p_at_sigma0", r.p_at_sigma0},
            {"iterations", r.iterations},
            {"family", r.family}};
}

inline nlohmann::json to_json(const DephasingReport& r)
{
    return {{"dphi", r.dphi}, {"negativity", r.negativity}, {"fraction", r.fraction}, {"trace_check", r.trace_check}};
}

inline nlohmann::json to_json(const PhaseBound& b)
{
    nlohmann::json j{{"E", b.fraction}, {"P", b.p}, {"size", b.size}, {"unbounded", b.unbounded}};
    if (b.unbounded)
        j["dphi"] = nullptr;
    else
        j["dphi"] = b.dphi;
    return j;
}

} // namespace macrosize
