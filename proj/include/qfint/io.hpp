#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qfint/errors.hpp"
#include "qfint/model.hpp"
#include "qfint/symmat.hpp"

// Instance files and JSON reports.
//
// Instance file:
//   { "n": 4, "forms": [ { "triplets": [[0, 0, 0.02], [0, 1, -0.02], ...] }, ... ] }
// Indices are 0-based with i <= j; an off-diagonal triplet fills (i,j) and (j,i).

namespace qfint::io {

using Json = nlohmann::ordered_json;

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

inline void emit(const Json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + Json(it.key()).dump() + ": ";
            emit(it.value(), out, indent + 2);
        }
        out += "\n" + close + "}";
    } else if (j.is_array()) {
        bool flat = true;
        for (const auto& e : j) flat = flat && is_scalar(e);
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                emit(j[i], out, indent);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            emit(j[i], out, indent + 2);
        }
        out += "\n" + close + "]";
    } else if (j.is_number_float()) {
        out += format_double(j.get<double>());
    } else {
        out += j.dump();
    }
}

}  // namespace detail

/// Pretty JSON with every floating-point number written as %.17g.
inline std::string dump(const Json& j) {
    std::string out;
    detail::emit(j, out, 0);
    out += "\n";
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(what + ": " + e.what());
    }
}

inline std::size_t read_index(const Json& j, const std::string& where) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0))
        throw ParseError(where + ": expected a non-negative integer");
    return j.get<std::size_t>();
}

inline Instance parse_instance(const std::string& text) {
    const Json doc = parse_json(text, "instance");
    if (!doc.is_object()) throw ParseError("instance: top level must be an object");
    if (!doc.contains("n")) throw ParseError("instance: missing \"n\"");
    const std::size_t n = read_index(doc["n"], "instance.n");
    if (n == 0) throw ParseError("instance.n must be positive");
    if (!doc.contains("forms") || !doc["forms"].is_array()) throw ParseError("instance: \"forms\" must be an array");

    std::vector<SymMatrix> forms;
    const Json& fs = doc["forms"];
    for (std::size_t k = 0; k < fs.size(); ++k) {
        const std::string where = "forms[" + std::to_string(k) + "]";
        const Json& f = fs[k];
        if (!f.is_object() || !f.contains("triplets") || !f["triplets"].is_array())
            throw ParseError(where + ": expected {\"triplets\": [...]}");
        std::vector<Triplet> ts;
        std::set<std::pair<std::size_t, std::size_t>> seen;
        const Json& arr = f["triplets"];
        for (std::size_t t = 0; t < arr.size(); ++t) {
            const std::string tw = where + ".triplets[" + std::to_string(t) + "]";
            const Json& e = arr[t];
            if (!e.is_array() || e.size() != 3) throw ParseError(tw + ": expected [i, j, v]");
            const std::size_t i = read_index(e[0], tw + "[0]");
            const std::size_t j = read_index(e[1], tw + "[1]");
            if (!e[2].is_number()) throw ParseError(tw + ": value must be a number");
            const double v = e[2].get<double>();
            if (!std::isfinite(v)) throw ParseError(tw + ": value must be finite");
            if (i > j) throw ParseError(tw + ": need i <= j");
            if (j >= n) throw ParseError(tw + ": index out of range for n=" + std::to_string(n));
            if (!seen.emplace(i, j).second) throw ParseError(tw + ": duplicate entry (" + std::to_string(i) + "," +
                                                             std::to_string(j) + ")");
            ts.push_back({i, j, v});
        }
        forms.push_back(SymMatrix::from_triplets(n, ts));
    }
    return build_instance(n, std::move(forms));
}

inline Instance load_instance(const std::string& path) { return parse_instance(read_file(path)); }

inline Json instance_json(const Instance& inst) {
    Json doc;
    doc["n"] = inst.n();
    Json forms = Json::array();
    for (const auto& f : inst.forms()) {
        Json ts = Json::array();
        for (const auto& t : f.matrix.triplets()) ts.push_back(Json::array({t.i, t.j, t.v}));
        forms.push_back(Json{{"triplets", std::move(ts)}});
    }
    doc["forms"] = std::move(forms);
    return doc;
}

inline std::string serialize_instance(const Instance& inst) { return dump(instance_json(inst)); }

}  // namespace qfint::io
