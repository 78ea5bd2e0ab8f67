/*
 * Copyright 2026 The seduq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seduq/cli_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seduq/common.hpp"
#include "seduq/gpe.hpp"

namespace seduq::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// Cuts a trailing comment; a '#' inside double quotes does not count.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

struct Scalar {
    enum Kind { String, Bool, Int, Float } kind;
    std::string str;
    bool b = false;
    long long i = 0;
    double f = 0.0;
};

Scalar parse_scalar(const std::string& raw, int line) {
    std::string v = trim(raw);
    if (v.empty()) throw ParseError("empty value", line);
    Scalar s{};
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ParseError("unterminated string", line);
        s.kind = Scalar::String;
        s.str = v.substr(1, v.size() - 2);
        return s;
    }
    if (v == "true" || v == "false") {
        s.kind = Scalar::Bool;
        s.b = v == "true";
        return s;
    }
    {
        long long out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec == std::errc() && p == v.data() + v.size()) {
            s.kind = Scalar::Int;
            s.i = out;
            s.f = static_cast<double>(out);
            return s;
        }
    }
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used == v.size()) {
            s.kind = Scalar::Float;
            s.f = out;
            return s;
        }
    } catch (const std::exception&) {
    }
    throw ParseError("cannot parse value '" + v + "'", line);
}

std::vector<Scalar> parse_value_list(const std::string& raw, int line) {
    std::string v = trim(raw);
    if (v.empty() || v.front() != '[') return {parse_scalar(v, line)};
    if (v.back() != ']') throw ParseError("unterminated array", line);
    std::vector<Scalar> out;
    std::string inner = v.substr(1, v.size() - 2);
    std::string part;
    bool quoted = false;
    for (char ch : inner) {
        if (ch == '"') quoted = !quoted;
        if (ch == ',' && !quoted) {
            if (!trim(part).empty()) out.push_back(parse_scalar(part, line));
            part.clear();
        } else {
            part += ch;
        }
    }
    if (!trim(part).empty()) out.push_back(parse_scalar(part, line));
    return out;
}

double as_number(const Scalar& s, const std::string& key, int line) {
    if (s.kind != Scalar::Int && s.kind != Scalar::Float)
        throw ParseError(key + " must be a number", line);
    return s.f;
}

long long as_int(const Scalar& s, const std::string& key, int line) {
    if (s.kind != Scalar::Int)
        throw ParseError(key + " must be an integer", line);
    return s.i;
}

bool as_bool(const Scalar& s, const std::string& key, int line) {
    if (s.kind != Scalar::Bool)
        throw ParseError(key + " must be true or false", line);
    return s.b;
}

std::string as_string(const Scalar& s, const std::string& key, int line) {
    if (s.kind != Scalar::String)
        throw ParseError(key + " must be a quoted string", line);
    return s.str;
}

} // namespace

CliConfig parse_config_text(const std::string& text) {
    CliConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(strip_comment(line));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ParseError("malformed section header", lineno);
            section = trim(t.substr(1, t.size() - 2));
            if (section != "paths" && section != "kle" &&
                section != "latent" && section != "sampling" &&
                section != "gpe" && section != "pipeline")
                throw InvalidConfig("unknown config section '" + section +
                                    "' (line " + std::to_string(lineno) + ")");
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key = value", lineno);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno);
        std::string full = section.empty() ? key : section + "." + key;
        std::vector<Scalar> vals = parse_value_list(value, lineno);
        const Scalar& v0 = vals.front();

        if (full == "paths.wind") {
            for (const Scalar& s : vals)
                cfg.wind_paths.push_back(as_string(s, full, lineno));
        } else if (full == "paths.case") {
            cfg.case_path = as_string(v0, full, lineno);
        } else if (full == "paths.out") {
            cfg.out_dir = as_string(v0, full, lineno);
        } else if (full == "kle.variance_target") {
            cfg.pipe.variance_target = as_number(v0, full, lineno);
        } else if (full == "latent.dependency_threshold") {
            cfg.pipe.dependency_threshold = as_number(v0, full, lineno);
        } else if (full == "sampling.reference_pool") {
            cfg.pipe.reference_pool =
                static_cast<int>(as_int(v0, full, lineno));
        } else if (full == "gpe.basis") {
            cfg.pipe.basis = gpe::parse_basis(as_string(v0, full, lineno));
        } else if (full == "gpe.kernel") {
            cfg.pipe.kernel = gpe::parse_kernel(as_string(v0, full, lineno));
        } else if (full == "pipeline.train_size") {
            cfg.pipe.train_size = static_cast<int>(as_int(v0, full, lineno));
        } else if (full == "pipeline.mc_size") {
            cfg.pipe.mc_size = static_cast<int>(as_int(v0, full, lineno));
        } else if (full == "pipeline.seed") {
            cfg.pipe.seed = static_cast<std::uint64_t>(as_int(v0, full, lineno));
        } else if (full == "pipeline.with_mc") {
            cfg.pipe.with_mc = as_bool(v0, full, lineno);
        } else if (full == "pipeline.curtailment") {
            cfg.pipe.curtailment = as_bool(v0, full, lineno);
        } else if (full == "pipeline.surrogate_passthrough") {
            cfg.pipe.surrogate_passthrough = as_bool(v0, full, lineno);
        } else if (full == "pipeline.trace") {
            cfg.pipe.trace_sizes.clear();
            for (const Scalar& s : vals)
                cfg.pipe.trace_sizes.push_back(
                    static_cast<int>(as_int(s, full, lineno)));
        } else {
            throw InvalidConfig("unknown config key '" + full + "' (line " +
                                std::to_string(lineno) + ")");
        }
    }
    return cfg;
}

CliConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("cannot open config file " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    CliConfig cfg = parse_config_text(buf.str());

    if (cfg.wind_paths.empty())
        throw InvalidConfig("config: paths.wind lists no files");
    if (cfg.case_path.empty())
        throw InvalidConfig("config: paths.case is required");
    for (const std::string& p : cfg.wind_paths)
        if (!std::filesystem::exists(p))
            throw InvalidInput("config: wind file does not exist: " + p);
    if (!std::filesystem::exists(cfg.case_path))
        throw InvalidInput("config: case file does not exist: " +
                           cfg.case_path);
    return cfg;
}

} // namespace seduq::cli
