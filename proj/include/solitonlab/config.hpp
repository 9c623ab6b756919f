#pragma once

// Typed access to JSON configuration with JSON-pointer error paths.

#include "solitonlab/errors.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace solitonlab::config {

inline std::string child(const std::string& pointer, const std::string& key)
{
    std::string escaped;
    for (char c : key) {
        if (c == '~')
            escaped += "~0";
        else if (c == '/')
            escaped += "~1";
        else
            escaped += c;
    }
    return pointer + "/" + escaped;
}

inline std::string child(const std::string& pointer, std::size_t index)
{
    return pointer + "/" + std::to_string(index);
}

template <class T>
T as(const nlohmann::json& j, const std::string& pointer)
{
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!j.is_number())
                throw ConfigError(pointer, "expected a number");
        } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!j.is_number_integer())
                throw ConfigError(pointer, "expected an integer");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!j.is_boolean())
                throw ConfigError(pointer, "expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!j.is_string())
                throw ConfigError(pointer, "expected a string");
        }
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(pointer, e.what());
    }
}

template <class T>
T required(const nlohmann::json& obj, const std::string& key, const std::string& pointer)
{
    const std::string p = child(pointer, key);
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(p, "required field is missing");
    return as<T>(obj.at(key), p);
}

template <class T>
T optional(const nlohmann::json& obj, const std::string& key, const std::string& pointer, T fallback)
{
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null())
        return fallback;
    return as<T>(obj.at(key), child(pointer, key));
}

} // namespace solitonlab::config
