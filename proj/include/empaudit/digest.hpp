#pragma once

#include <string>
#include <string_view>

namespace empaudit {

// Hex-encoded SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

// Short (16 hex char) prefix, used for artifact stamps and fixture keys.
std::string short_digest(std::string_view data);

}  // namespace empaudit
