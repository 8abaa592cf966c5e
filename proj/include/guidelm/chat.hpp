#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace guidelm {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view name);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using MessageList = std::vector<ChatMessage>;

nlohmann::json to_json(const MessageList& messages);
/// Throws ValidationError on unknown roles or non-string contents.
MessageList messages_from_json(const nlohmann::json& j);

}  // namespace guidelm
