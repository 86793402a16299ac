#pragma once

// Text grammar for the state families used on the command line:
//
//   fock:M=3               |M>
//   coherent:a2=40         |alpha>, alpha = sqrt(a2) (optional phase=rad)
//   cat:a2=0,b2=40         |alpha> and D(alpha)|beta>
//   dsp:a2=400             D(alpha)|+> and D(alpha)|->, |+-> = (|0> +- |1>)/sqrt2
//   spins:N=500,delta=0.3  N copies of cos t_j|g> + sin t_j|e>, t_j = pi/4 -+ delta/2
//   raw:file=PATH          CSV rows "real,imag" of Fock amplitudes
//
// Photonic pair families also accept theta= and phi= to rotate the pair.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "statekit.hpp"

namespace macrosize {

enum class Family { fock, coherent, cat, displaced_plusminus, spins, raw };

struct StateFamilySpec {
    Family family = Family::fock;
    std::map<std::string, double> params;
    /// raw only
    std::string file;

    double get(const std::string& key, double fallback) const
    {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return params.count(key) != 0; }
};

inline std::string_view family_tag(Family f)
{
    switch (f) {
    case Family::fock: return "fock";
    case Family::coherent: return "coherent";
    case Family::cat: return "cat";
    case Family::displaced_plusminus: return "dsp";
    case Family::spins: return "spins";
    case Family::raw: return "raw";
    }
    return "?";
}

/// Families that define both components on their own.
inline bool implies_pair(Family f)
{
    return f == Family::cat || f == Family::displaced_plusminus || f == Family::spins;
}

namespace detail {

inline double parse_number(std::string_view text, std::string_view key)
{
    const std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw parse_error("state spec: value for '" + std::string(key) + "' is not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v))
        throw parse_error("state spec: value for '" + std::string(key) + "' is not a number: '" + s + "'");
    return v;
}

inline const std::set<std::string>& allowed_keys(Family f)
{
    static const std::set<std::string> fock{"M"};
    static const std::set<std::string> coherent{"a2", "phase"};
    static const std::set<std::string> cat{"a2", "b2", "theta", "phi"};
    static const std::set<std::string> dsp{"a2", "theta", "phi"};
    static const std::set<std::string> spins{"N", "delta"};
    static const std::set<std::string> raw{};
    switch (f) {
    case Family::fock: return fock;
    case Family::coherent: return coherent;
    case Family::cat: return cat;
    case Family::displaced_plusminus: return dsp;
    case Family::spins: return spins;
    case Family::raw: return raw;
    }
    return raw;
}

inline void require_integer(const StateFamilySpec& s, const std::string& key, double min)
{
    const double v = s.get(key, min);
    if (v < min || std::floor(v) != v)
        throw parse_error("state spec: '" + key + "' must be an integer >= " + std::to_string(static_cast<long>(min)));
}

inline void validate(const StateFamilySpec& s)
{
    auto nonneg = [&](const char* key) {
        if (s.get(key, 0.0) < 0.0)
            throw parse_error(std::string("state spec: '") + key + "' must be >= 0");
    };
    switch (s.family) {
    case Family::fock:
        if (!s.has("M"))
            throw parse_error("state spec: fock needs M");
        require_integer(s, "M", 0);
        break;
    case Family::coherent:
        if (!s.has("a2"))
            throw parse_error("state spec: coherent needs a2");
        nonneg("a2");
        break;
    case Family::cat:
        if (!s.has("b2"))
            throw parse_error("state spec: cat needs b2");
        nonneg("a2");
        nonneg("b2");
        break;
    case Family::displaced_plusminus:
        if (!s.has("a2"))
            throw parse_error("state spec: dsp needs a2");
        nonneg("a2");
        break;
    case Family::spins: {
        if (!s.has("N") || !s.has("delta"))
            throw parse_error("state spec: spins needs N and delta");
        require_integer(s, "N", 1);
        const double delta = s.get("delta", 0.0);
        if (!(delta > 0.0 && delta < 0.5 * std::numbers::pi))
            throw parse_error("state spec: spins delta must lie in (0, pi/2)");
        break;
    }
    case Family::raw:
        if (s.file.empty())
            throw parse_error("state spec: raw needs file=PATH");
        break;
    }
}

} // namespace detail

inline StateFamilySpec parse_state_spec(std::string_view text)
{
    const auto colon = text.find(':');
    const std::string_view tag = text.substr(0, colon);
    const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

    StateFamilySpec spec;
    if (tag == "fock")
        spec.family = Family::fock;
    else if (tag == "coherent")
        spec.family = Family::coherent;
    else if (tag == "cat")
        spec.family = Family::cat;
    else if (tag == "dsp")
        spec.family = Family::displaced_plusminus;
    else if (tag == "spins")
        spec.family = Family::spins;
    else if (tag == "raw")
        spec.family = Family::raw;
    else
        throw parse_error("state spec: unknown family '" + std::string(tag) + "'");

    if (spec.family == Family::raw) {
        if (rest.substr(0, 5) != "file=")
            throw parse_error("state spec: raw expects file=PATH");
        spec.file = std::string(rest.substr(5));
        detail::validate(spec);
        return spec;
    }

    std::size_t pos = 0;
    while (pos < rest.size()) {
        auto comma = rest.find(',', pos);
        if (comma == std::string_view::npos)
            comma = rest.size();
        const auto item = rest.substr(pos, comma - pos);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw parse_error("state spec: expected key=value, got '" + std::string(item) + "'");
        const std::string key(item.substr(0, eq));
        if (!detail::allowed_keys(spec.family).count(key))
            throw parse_error("state spec: unknown key '" + key + "' for family " +
                              std::string(family_tag(spec.family)));
        if (spec.params.count(key))
            throw parse_error("state spec: duplicate key '" + key + "'");
        spec.params[key] = detail::parse_number(item.substr(eq + 1), key);
        pos = comma + 1;
    }
    detail::validate(spec);
    return spec;
}

/// Copy of `spec` with one parameter replaced; revalidated.
inline StateFamilySpec with_param(StateFamilySpec spec, const std::string& key, double value)
{
    if (!detail::allowed_keys(spec.family).count(key))
        throw parse_error("state spec: family " + std::string(family_tag(spec.family)) + " has no parameter '" +
                          key + "'");
    spec.params[key] = value;
    detail::validate(spec);
    return spec;
}

inline std::string to_string(const StateFamilySpec& spec)
{
    std::ostringstream os;
    os << family_tag(spec.family) << ':';
    if (spec.family == Family::raw) {
        os << "file=" << spec.file;
        return os.str();
    }
    bool first = true;
    for (const auto& [k, v] : spec.params) {
        if (!first)
            os << ',';
        os << k << '=' << v;
        first = false;
    }
    return os.str();
}

/// Reads amplitudes from CSV rows "real,imag" (a lone column is real);
/// blank lines and lines starting with '#' are skipped.
inline FockAmplitudeVector read_amplitudes_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw parse_error("raw state: cannot open '" + path + "'");
    std::vector<complex> amps;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        const auto comma = line.find(',');
        try {
            const double re = detail::parse_number(line.substr(0, comma), "real");
            const double im =
                comma == std::string::npos ? 0.0 : detail::parse_number(line.substr(comma + 1), "imag");
            amps.emplace_back(re, im);
        } catch (const parse_error& e) {
            throw parse_error("raw state: line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (amps.empty())
        throw parse_error("raw state: no amplitudes in '" + path + "'");
    try {
        return FockAmplitudeVector(std::move(amps));
    } catch (const std::invalid_argument& e) {
        throw parse_error(std::string("raw state: ") + e.what());
    }
}

/// Two components ready for the detector. Photonic families also carry
/// their amplitude vectors.
struct ComponentPair {
    PhotonPMF a;
    PhotonPMF d;
    std::optional<FockAmplitudeVector> amp_a;
    std::optional<FockAmplitudeVector> amp_d;
    std::string label;
};

/// Single component of a one-state family.
inline FockAmplitudeVector build_component(const StateFamilySpec& spec,
                                           std::optional<std::size_t> cutoff = std::nullopt)
{
    switch (spec.family) {
    case Family::fock: {
        const auto m = static_cast<std::size_t>(spec.get("M", 0.0));
        return make_fock(m, cutoff ? std::optional<std::size_t>(std::max(*cutoff, m)) : std::nullopt);
    }
    case Family::coherent:
        return make_coherent(std::polar(std::sqrt(spec.get("a2", 0.0)), spec.get("phase", 0.0)), cutoff);
    case Family::raw: {
        auto s = read_amplitudes_csv(spec.file);
        if (cutoff && *cutoff > s.cutoff())
            s = s.padded(*cutoff);
        return s;
    }
    default:
        throw parse_error("state spec: family " + std::string(family_tag(spec.family)) +
                          " defines a pair, not a single component");
    }
}

inline ComponentPair build_pair(const StateFamilySpec& spec, const std::optional<StateFamilySpec>& second = {},
                                std::optional<std::size_t> cutoff = std::nullopt)
{
    ComponentPair out;
    out.label = to_string(spec);
    if (spec.family == Family::spins) {
        if (second)
            throw parse_error("state spec: spins defines both components; drop --pair");
        const auto n = static_cast<std::size_t>(spec.get("N", 1.0));
        const double delta = spec.get("delta", 0.0);
        out.a = spin_excitation_pmf(n, 0.25 * std::numbers::pi - 0.5 * delta);
        out.d = spin_excitation_pmf(n, 0.25 * std::numbers::pi + 0.5 * delta);
        return out;
    }

    FockAmplitudeVector a, d;
    if (spec.family == Family::cat) {
        if (second)
            throw parse_error("state spec: cat defines both components; drop --pair");
        const double alpha = std::sqrt(spec.get("a2", 0.0));
        const double beta = std::sqrt(spec.get("b2", 0.0));
        a = make_coherent(alpha, cutoff);
        d = displace(make_coherent(beta, cutoff), alpha, cutoff);
    } else if (spec.family == Family::displaced_plusminus) {
        if (second)
            throw parse_error("state spec: dsp defines both components; drop --pair");
        const double alpha = std::sqrt(spec.get("a2", 0.0));
        const double h = 1.0 / std::numbers::sqrt2;
        const FockAmplitudeVector plus(std::vector<complex>{h, h});
        const FockAmplitudeVector minus(std::vector<complex>{h, -h});
        a = displace(plus, alpha, cutoff);
        d = displace(minus, alpha, cutoff);
    } else {
        if (!second)
            throw parse_error("state spec: family " + std::string(family_tag(spec.family)) +
                              " needs a second component (--pair)");
        if (implies_pair(second->family))
            throw parse_error("state spec: --pair must be a single-component family");
        a = build_component(spec, cutoff);
        d = build_component(*second, cutoff);
        out.label += " | " + to_string(*second);
    }

    const double theta = spec.get("theta", 0.0);
    const double phi = spec.get("phi", 0.0);
    if (theta != 0.0 || phi != 0.0) {
        auto rotated = superpose(a, d, theta, phi);
        a = std::move(rotated.a);
        d = std::move(rotated.d);
    }
    out.a = photon_pmf(a);
    out.d = photon_pmf(d);
    out.amp_a = std::move(a);
    out.amp_d = std::move(d);
    return out;
}

} // namespace macrosize
