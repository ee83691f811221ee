#pragma once

// Internal helpers over toml++; not part of the public headers.

#include <optional>
#include <string>
#include <string_view>

#include "toml.hpp"
#include "tsched/network.h"

namespace tsched::detail {

inline toml::table parse_toml(std::string_view text) {
    try {
        return toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::string msg = "parse error: ";
        msg += e.description();
        const auto& src = e.source();
        msg += " (line " + std::to_string(src.begin.line) + ", column " + std::to_string(src.begin.column) + ")";
        throw ScenarioError(msg);
    }
}

inline std::optional<double> opt_number(const toml::node_view<const toml::node>& n) {
    if (!n) return std::nullopt;
    if (auto v = n.value<double>()) return *v;
    throw ScenarioError("expected a number");
}

inline double number_or(const toml::node_view<const toml::node>& n, double fallback, std::string_view what) {
    if (!n) return fallback;
    if (auto v = n.value<double>()) return *v;
    throw ScenarioError("expected a number for '" + std::string(what) + "'");
}

inline double require_number(const toml::node_view<const toml::node>& n, std::string_view what) {
    if (auto v = n.value<double>()) return *v;
    throw ScenarioError("missing or non-numeric '" + std::string(what) + "'");
}

inline long long require_int(const toml::node_view<const toml::node>& n, std::string_view what) {
    if (auto v = n.value<long long>()) return *v;
    throw ScenarioError("missing or non-integer '" + std::string(what) + "'");
}

inline long long int_or(const toml::node_view<const toml::node>& n, long long fallback, std::string_view what) {
    if (!n) return fallback;
    if (auto v = n.value<long long>()) return *v;
    throw ScenarioError("expected an integer for '" + std::string(what) + "'");
}

inline std::string string_or(const toml::node_view<const toml::node>& n, std::string fallback) {
    if (!n) return fallback;
    if (auto v = n.value<std::string>()) return *v;
    throw ScenarioError("expected a string");
}

inline bool bool_or(const toml::node_view<const toml::node>& n, bool fallback, std::string_view what) {
    if (!n) return fallback;
    if (auto v = n.value<bool>()) return *v;
    throw ScenarioError("expected a boolean for '" + std::string(what) + "'");
}

NetworkGraph load_network_table(const toml::table& doc);

}  // namespace tsched::detail
