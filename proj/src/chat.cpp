#include "guidelm/chat.hpp"

#include "guidelm/errors.hpp"

namespace guidelm {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::optional<Role> parse_role(std::string_view name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    return std::nullopt;
}

nlohmann::json to_json(const MessageList& messages) {
    auto arr = nlohmann::json::array();
    for (const auto& m : messages) {
        arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return arr;
}

MessageList messages_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("messages must be an array");
    MessageList out;
    for (const auto& m : j) {
        if (!m.is_object() || !m.contains("role") || !m["role"].is_string())
            throw ValidationError("message without a string role");
        const auto role = parse_role(m["role"].get<std::string>());
        if (!role) throw ValidationError("unknown role '" + m["role"].get<std::string>() + "'");
        if (!m.contains("content") || !m["content"].is_string())
            throw ValidationError("message without string content");
        out.push_back({*role, m["content"].get<std::string>()});
    }
    return out;
}

}  // namespace guidelm
