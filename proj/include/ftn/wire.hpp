#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ftn::wire {

// 4-octet device address, rendered dotted-decimal.
struct Address {
    std::array<std::uint8_t, 4> octets{};

    static constexpr Address of(std::uint8_t a, std::uint8_t b, std::uint8_t c,
                                std::uint8_t d) {
        return Address{{a, b, c, d}};
    }

    // Parses "181.1.1.2". Rejects anything that does not round-trip.
    static std::optional<Address> parse(std::string_view dotted);

    std::string str() const;

    auto operator<=>(const Address&) const = default;
};

enum class MessageKind { Data, Fdqm, Fdrm, Nack };

std::string_view to_string(MessageKind kind);

// Frame layout, bit-exact:
//
//   offset 0      flag, 1 byte
//   offset 1..4   sender address, 4 octets
//   offset 5..8   destination address, 4 octets
//   offset 9..    payload, 0..=1500 bytes (Data only)
//
// Flag bits, numbered from the most significant:
//   bit 0 (0x80)  1 = Data, 0 = control (FDM family)
//   bit 1 (0x40)  control only: 0 = FDQM, 1 = FDRM
//   bit 2 (0x20)  control only: 1 = NACK (overrides bit 1)
// Unused bits are written as zero and ignored on decode.
inline constexpr std::uint8_t kFlagData = 0x80;
inline constexpr std::uint8_t kFlagReport = 0x40;
inline constexpr std::uint8_t kFlagNack = 0x20;

inline constexpr std::size_t kHeaderBytes = 9;
inline constexpr std::size_t kMaxPayloadBytes = 1500;
inline constexpr std::size_t kMaxFrameBytes = kHeaderBytes + kMaxPayloadBytes;

struct Message {
    MessageKind kind = MessageKind::Data;
    Address sender;
    Address destination;
    std::vector<std::uint8_t> payload;  // empty for FDQM/FDRM/NACK
    std::uint64_t id = 0;               // simulation correlation tag, never serialized
};

// Wire-level equality: everything except the simulation-only id tag.
bool same_frame(const Message& a, const Message& b);

// Total: any byte maps to a kind.
MessageKind classify_flag(std::uint8_t flag);

// Canonical flag byte for a kind (unused bits zero).
std::uint8_t flag_for(MessageKind kind);

// Throws std::length_error when the payload exceeds 1500 bytes and
// std::invalid_argument for a control message carrying payload.
std::vector<std::uint8_t> encode(const Message& m);

enum class DecodeError { TruncatedFrame, OversizeFrame, MalformedControl };

std::string_view to_string(DecodeError err);

std::variant<Message, DecodeError> decode(std::span<const std::uint8_t> bytes);

}  // namespace ftn::wire
