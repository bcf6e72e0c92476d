#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ftn/wire.hpp"

using namespace ftn::wire;

namespace {

Message random_message(std::mt19937& rng) {
    Message m;
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: m.kind = MessageKind::Data; break;
        case 1: m.kind = MessageKind::Fdqm; break;
        case 2: m.kind = MessageKind::Fdrm; break;
        default: m.kind = MessageKind::Nack; break;
    }
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& o : m.sender.octets) o = static_cast<std::uint8_t>(byte(rng));
    for (auto& o : m.destination.octets) o = static_cast<std::uint8_t>(byte(rng));
    if (m.kind == MessageKind::Data) {
        std::size_t len = std::uniform_int_distribution<std::size_t>(0, 1500)(rng);
        m.payload.resize(len);
        for (auto& b : m.payload) b = static_cast<std::uint8_t>(byte(rng));
    }
    return m;
}

}  // namespace

TEST_CASE("flag classification") {
    CHECK(classify_flag(0b00000000) == MessageKind::Fdqm);
    CHECK(classify_flag(0b10000000) == MessageKind::Data);
    CHECK(classify_flag(0b00100000) == MessageKind::Nack);
    CHECK(classify_flag(0b01000000) == MessageKind::Fdrm);
    // NACK bit wins over the report bit on control frames.
    CHECK(classify_flag(0b01100000) == MessageKind::Nack);
    // Unused bits are ignored.
    CHECK(classify_flag(0b10011111) == MessageKind::Data);
    CHECK(classify_flag(0b00000001) == MessageKind::Fdqm);
    // Total over all 256 bytes, and consistent with the canonical flags.
    for (int f = 0; f < 256; ++f)
        CHECK_NOTHROW(classify_flag(static_cast<std::uint8_t>(f)));
    for (MessageKind k :
         {MessageKind::Data, MessageKind::Fdqm, MessageKind::Fdrm, MessageKind::Nack})
        CHECK(classify_flag(flag_for(k)) == k);
}

TEST_CASE("encode fixed layout") {
    Message m;
    m.kind = MessageKind::Fdqm;
    m.sender = Address::of(181, 1, 1, 2);
    m.destination = Address::of(168, 1, 1, 1);
    auto bytes = encode(m);
    REQUIRE(bytes.size() == 9);
    CHECK(bytes == std::vector<std::uint8_t>{0x00, 181, 1, 1, 2, 168, 1, 1, 1});

    Message d;
    d.kind = MessageKind::Data;
    d.sender = Address::of(1, 2, 3, 4);
    d.destination = Address::of(5, 6, 7, 8);
    auto db = encode(d);
    REQUIRE(db.size() == 9);
    CHECK(db[0] == 0x80);
}

TEST_CASE("encode errors") {
    Message m;
    m.kind = MessageKind::Data;
    m.payload.assign(1501, 0xab);
    CHECK_THROWS_AS(encode(m), std::length_error);

    Message c;
    c.kind = MessageKind::Nack;
    c.payload.assign(1, 0x00);
    CHECK_THROWS_AS(encode(c), std::invalid_argument);
}

TEST_CASE("decode malformed inputs") {
    std::vector<std::uint8_t> eight(8, 0);
    auto r1 = decode(eight);
    REQUIRE(std::holds_alternative<DecodeError>(r1));
    CHECK(std::get<DecodeError>(r1) == DecodeError::TruncatedFrame);

    std::vector<std::uint8_t> huge(1510, 0x80);
    auto r2 = decode(huge);
    REQUIRE(std::holds_alternative<DecodeError>(r2));
    CHECK(std::get<DecodeError>(r2) == DecodeError::OversizeFrame);

    std::vector<std::uint8_t> control{0x00, 1, 1, 1, 1, 2, 2, 2, 2, 0xff};
    auto r3 = decode(control);
    REQUIRE(std::holds_alternative<DecodeError>(r3));
    CHECK(std::get<DecodeError>(r3) == DecodeError::MalformedControl);
}

TEST_CASE("decode tolerates nonzero unused flag bits") {
    std::vector<std::uint8_t> bytes{0b10000111, 1, 1, 1, 1, 2, 2, 2, 2, 42};
    auto r = decode(bytes);
    REQUIRE(std::holds_alternative<Message>(r));
    CHECK(std::get<Message>(r).kind == MessageKind::Data);
    CHECK(std::get<Message>(r).payload == std::vector<std::uint8_t>{42});
}

TEST_CASE("round-trip property") {
    std::mt19937 rng(20240917);
    for (int i = 0; i < 10'000; ++i) {
        Message m = random_message(rng);
        auto bytes = encode(m);
        CHECK(bytes.size() == 9 + m.payload.size());
        CHECK(classify_flag(bytes[0]) == m.kind);
        auto back = decode(bytes);
        REQUIRE(std::holds_alternative<Message>(back));
        CHECK(same_frame(std::get<Message>(back), m));
    }
}

TEST_CASE("fdrm round-trips sender and destination") {
    Message m;
    m.kind = MessageKind::Fdrm;
    m.sender = Address::of(10, 0, 3, 1);
    m.destination = Address::of(10, 0, 1, 1);
    auto back = decode(encode(m));
    REQUIRE(std::holds_alternative<Message>(back));
    const Message& got = std::get<Message>(back);
    CHECK(got.kind == MessageKind::Fdrm);
    CHECK(got.sender == m.sender);
    CHECK(got.destination == m.destination);
}

TEST_CASE("address parsing round-trips") {
    for (const char* text : {"0.0.0.0", "181.1.1.2", "255.255.255.255", "10.5.0.3"}) {
        auto a = Address::parse(text);
        REQUIRE(a.has_value());
        CHECK(a->str() == text);
    }
    CHECK_FALSE(Address::parse("1.2.3").has_value());
    CHECK_FALSE(Address::parse("1.2.3.256").has_value());
    CHECK_FALSE(Address::parse("1.2.3.4.5").has_value());
    CHECK_FALSE(Address::parse("a.b.c.d").has_value());
    CHECK_FALSE(Address::parse("1.2.3.4 ").has_value());
}
