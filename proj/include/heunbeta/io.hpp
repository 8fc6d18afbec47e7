#pragma once

// Parameter-file parsing and deterministic report formatting for the CLI.
// Complex values travel as [re, im] pairs in JSON and as paired columns in
// CSV; every number is printed with 17 significant digits so identical inputs
// produce byte-identical outputs.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heunbeta/expansions.hpp"

namespace heunbeta {

inline std::string format_g17(double v) {
    if (v == 0.0) v = 0.0; // canonicalize negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_complex(Complex v) {
    return "[" + format_g17(v.real()) + ", " + format_g17(v.imag()) + "]";
}

inline nlohmann::json complex_to_json(Complex v) {
    return nlohmann::json::array({v.real(), v.imag()});
}

/// Parsed parameter file: equation parameters plus optional series controls.
struct ParamsFileData {
    CheParams params;
    std::optional<Family> family;
    std::optional<int> N;
    std::optional<Complex> delta0;
    std::optional<int> max_terms;
    std::optional<double> tail_tol;
};

namespace detail {

inline Complex json_to_complex(const nlohmann::json& j, const std::string& key) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex(j[0].get<double>(), j[1].get<double>());
    throw ParseError("params: key '" + key + "' must be a real number or a [re, im] pair");
}

} // namespace detail

/// Parses the JSON parameter schema. Unknown keys are rejected.
inline ParamsFileData parse_params_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("params: top-level JSON object expected");
    ParamsFileData out;
    bool seen[5] = {false, false, false, false, false};
    for (const auto& [key, value] : j.items()) {
        if (key == "p") { out.params.p = detail::json_to_complex(value, key); seen[0] = true; }
        else if (key == "alpha") { out.params.alpha = detail::json_to_complex(value, key); seen[1] = true; }
        else if (key == "gamma") { out.params.gamma = detail::json_to_complex(value, key); seen[2] = true; }
        else if (key == "delta") { out.params.delta = detail::json_to_complex(value, key); seen[3] = true; }
        else if (key == "sigma") { out.params.sigma = detail::json_to_complex(value, key); seen[4] = true; }
        else if (key == "family") {
            if (!value.is_string()) throw ParseError("params: 'family' must be a string");
            const auto f = parse_family(value.get<std::string>());
            if (!f) throw ParseError("params: unknown family '" + value.get<std::string>() + "'");
            out.family = f;
        } else if (key == "N") {
            if (!value.is_number_integer() || value.get<long>() < 0)
                throw ParseError("params: 'N' must be a non-negative integer");
            out.N = value.get<int>();
        } else if (key == "delta0") {
            out.delta0 = detail::json_to_complex(value, key);
        } else if (key == "max_terms") {
            if (!value.is_number_integer() || value.get<long>() < 1)
                throw ParseError("params: 'max_terms' must be a positive integer");
            out.max_terms = value.get<int>();
        } else if (key == "tail_tol") {
            if (!value.is_number()) throw ParseError("params: 'tail_tol' must be a number");
            out.tail_tol = value.get<double>();
        } else {
            throw ParseError("params: unknown key '" + key + "'");
        }
    }
    for (int i = 0; i < 5; ++i)
        if (!seen[i]) throw ParseError("params: keys p, alpha, gamma, delta, sigma are all required");
    if (!is_finite(out.params.p) || !is_finite(out.params.alpha) || !is_finite(out.params.gamma) ||
        !is_finite(out.params.delta) || !is_finite(out.params.sigma))
        throw ParseError("params: parameters must be finite");
    return out;
}

inline ParamsFileData parse_params_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("params: invalid JSON: ") + e.what());
    }
    return parse_params_json(j);
}

/// One row of a grid evaluation. residual_abs / residual_rel are NaN at the
/// singular points z = 0, 1 where the equation residual is undefined.
struct EvalRow {
    Complex z{};
    Complex u{};
    double residual_abs = 0.0;
    double residual_rel = 0.0;
};

inline constexpr const char* kEvalCsvHeader = "z_re,z_im,u_re,u_im,residual_abs,residual_rel";

inline void write_eval_csv(std::ostream& os, const std::vector<EvalRow>& rows) {
    os << kEvalCsvHeader << "\n";
    for (const EvalRow& r : rows) {
        os << format_g17(r.z.real()) << ',' << format_g17(r.z.imag()) << ','
           << format_g17(r.u.real()) << ',' << format_g17(r.u.imag()) << ','
           << format_g17(r.residual_abs) << ',' << format_g17(r.residual_rel) << "\n";
    }
}

inline void write_eval_json(std::ostream& os, const std::vector<EvalRow>& rows) {
    // hand-rolled so the 17-digit formatting matches the CSV writer exactly;
    // NaN residuals (singular grid points) become JSON null
    const auto num = [](double v) { return std::isfinite(v) ? format_g17(v) : std::string("null"); };
    os << "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const EvalRow& r = rows[i];
        os << "  {\"z\": " << format_complex(r.z) << ", \"u\": " << format_complex(r.u)
           << ", \"residual_abs\": " << num(r.residual_abs)
           << ", \"residual_rel\": " << num(r.residual_rel) << "}";
        os << (i + 1 < rows.size() ? ",\n" : "\n");
    }
    os << "]\n";
}

} // namespace heunbeta
