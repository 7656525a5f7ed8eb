#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "crackmesh/protocol/messages.hpp"

namespace crackmesh::protocol {

/// One JSON object per text frame. Keyspace bounds are decimal strings.
std::string encode(const Message& message);

/// Total over arbitrary bytes: returns a message or throws crackmesh::Error
/// with kMalformedFrame, kUnknownType or kSchemaViolation; `field()` names
/// the offending key (dotted for nested keys).
Message decode(std::string_view frame);

/// Attack descriptions share one JSON shape between the agent channel and the
/// HTTP API.
nlohmann::json attack_to_json(const AttackMode& mode);
AttackMode attack_from_json(const nlohmann::json& object, const std::string& field = "attack");

}  // namespace crackmesh::protocol
