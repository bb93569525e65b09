#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

// Minimal structural validator: type / required / properties / items / enum.
// Enough to keep emitted artifacts honest against the shipped schemas.

namespace testor {

inline bool schema_type_ok(const nlohmann::json& inst, const std::string& t) {
    if (t == "object") return inst.is_object();
    if (t == "array") return inst.is_array();
    if (t == "string") return inst.is_string();
    if (t == "boolean") return inst.is_boolean();
    if (t == "integer") return inst.is_number_integer();
    if (t == "number") return inst.is_number();
    if (t == "null") return inst.is_null();
    return false;
}

inline void schema_validate(const nlohmann::json& schema, const nlohmann::json& inst,
                            const std::string& where = "$") {
    using nlohmann::json;
    if (schema.contains("type")) {
        const json& t = schema.at("type");
        bool ok = false;
        if (t.is_array()) {
            for (const json& x : t) ok = ok || schema_type_ok(inst, x.get<std::string>());
        } else {
            ok = schema_type_ok(inst, t.get<std::string>());
        }
        if (!ok) throw std::runtime_error(where + ": type mismatch");
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const json& v : schema.at("enum")) ok = ok || v == inst;
        if (!ok) throw std::runtime_error(where + ": value not in enum");
    }
    if (inst.is_object()) {
        if (schema.contains("required"))
            for (const json& r : schema.at("required"))
                if (!inst.contains(r.get<std::string>()))
                    throw std::runtime_error(where + ": missing " + r.get<std::string>());
        if (schema.contains("properties"))
            for (auto it = schema.at("properties").begin(); it != schema.at("properties").end(); ++it)
                if (inst.contains(it.key()))
                    schema_validate(it.value(), inst.at(it.key()), where + "." + it.key());
    }
    if (inst.is_array() && schema.contains("items"))
        for (std::size_t i = 0; i < inst.size(); ++i)
            schema_validate(schema.at("items"), inst[i], where + "[" + std::to_string(i) + "]");
}

}  // namespace testor
