#include "ftn/wire.hpp"

#include <charconv>
#include <stdexcept>

namespace ftn::wire {

std::optional<Address> Address::parse(std::string_view dotted) {
    Address out;
    const char* p = dotted.data();
    const char* end = dotted.data() + dotted.size();
    for (int i = 0; i < 4; ++i) {
        unsigned value = 0;
        auto [next, ec] = std::from_chars(p, end, value);
        if (ec != std::errc{} || next == p || value > 255) return std::nullopt;
        out.octets[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value);
        p = next;
        if (i < 3) {
            if (p == end || *p != '.') return std::nullopt;
            ++p;
        }
    }
    if (p != end) return std::nullopt;
    return out;
}

std::string Address::str() const {
    std::string s;
    s.reserve(15);
    for (int i = 0; i < 4; ++i) {
        if (i) s.push_back('.');
        s += std::to_string(octets[static_cast<std::size_t>(i)]);
    }
    return s;
}

std::string_view to_string(MessageKind kind) {
    switch (kind) {
        case MessageKind::Data: return "Data";
        case MessageKind::Fdqm: return "FDQM";
        case MessageKind::Fdrm: return "FDRM";
        case MessageKind::Nack: return "NACK";
    }
    return "?";
}

bool same_frame(const Message& a, const Message& b) {
    return a.kind == b.kind && a.sender == b.sender &&
           a.destination == b.destination && a.payload == b.payload;
}

MessageKind classify_flag(std::uint8_t flag) {
    if (flag & kFlagData) return MessageKind::Data;
    if (flag & kFlagNack) return MessageKind::Nack;
    if (flag & kFlagReport) return MessageKind::Fdrm;
    return MessageKind::Fdqm;
}

std::uint8_t flag_for(MessageKind kind) {
    switch (kind) {
        case MessageKind::Data: return kFlagData;
        case MessageKind::Fdqm: return 0x00;
        case MessageKind::Fdrm: return kFlagReport;
        case MessageKind::Nack: return kFlagNack;
    }
    return 0x00;
}

std::vector<std::uint8_t> encode(const Message& m) {
    if (m.payload.size() > kMaxPayloadBytes)
        throw std::length_error("payload exceeds 1500 bytes");
    if (m.kind != MessageKind::Data && !m.payload.empty())
        throw std::invalid_argument("control message must carry an empty payload");

    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + m.payload.size());
    out.push_back(flag_for(m.kind));
    out.insert(out.end(), m.sender.octets.begin(), m.sender.octets.end());
    out.insert(out.end(), m.destination.octets.begin(), m.destination.octets.end());
    out.insert(out.end(), m.payload.begin(), m.payload.end());
    return out;
}

std::string_view to_string(DecodeError err) {
    switch (err) {
        case DecodeError::TruncatedFrame: return "truncated frame";
        case DecodeError::OversizeFrame: return "oversize frame";
        case DecodeError::MalformedControl: return "control message with payload";
    }
    return "?";
}

std::variant<Message, DecodeError> decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes) return DecodeError::TruncatedFrame;
    if (bytes.size() > kMaxFrameBytes) return DecodeError::OversizeFrame;

    Message m;
    m.kind = classify_flag(bytes[0]);
    for (std::size_t i = 0; i < 4; ++i) {
        m.sender.octets[i] = bytes[1 + i];
        m.destination.octets[i] = bytes[5 + i];
    }
    if (bytes.size() > kHeaderBytes) {
        if (m.kind != MessageKind::Data) return DecodeError::MalformedControl;
        m.payload.assign(bytes.begin() + kHeaderBytes, bytes.end());
    }
    return m;
}

}  // namespace ftn::wire
