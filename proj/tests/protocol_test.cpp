#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "ftn/protocol.hpp"

using namespace ftn;
using namespace ftn::protocol;
using topo::ConnectionStatus;
using topo::NodeId;
using wire::MessageKind;

namespace {

struct Fixture {
    topo::Topology t = topo::build_paper_topology();
    FtnParams params;

    NodeId id(const char* name) const { return t.find_node(name); }
    wire::Address addr(const char* name) const { return t.node(id(name)).address; }

    RouterState router(const char* name,
                       ProtocolKind kind = ProtocolKind::Ftn) const {
        return RouterState(t, id(name), params, kind);
    }

    Frame data(const char* from, const char* to, std::uint64_t id = 1,
               std::int64_t bits = 500) const {
        Frame f;
        f.kind = MessageKind::Data;
        f.sender = addr(from);
        f.destination = addr(to);
        f.size_bits = bits;
        f.id = id;
        return f;
    }

    Frame fdm(MessageKind kind, const char* from, const char* to) const {
        Frame f;
        f.kind = kind;
        f.sender = addr(from);
        f.destination = addr(to);
        f.size_bits = 72;
        return f;
    }
};

template <typename T>
std::vector<T> pick(const std::vector<Action>& actions) {
    std::vector<T> out;
    for (const auto& a : actions)
        if (const T* v = std::get_if<T>(&a)) out.push_back(*v);
    return out;
}

}  // namespace

TEST_CASE("detection tick queries every up neighbor") {
    Fixture fx;
    auto r1 = fx.router("R1");
    auto actions = r1.on_detection_tick(0);
    auto sends = pick<SendAction>(actions);
    REQUIRE(sends.size() == 3);  // GS1, R2, R3
    for (const auto& s : sends) {
        CHECK(s.frame.kind == MessageKind::Fdqm);
        CHECK(s.frame.sender == fx.addr("R1"));
    }
    CHECK(pick<MarkInactiveAction>(actions).empty());
}

TEST_CASE("a silent neighbor is marked inactive one period later") {
    Fixture fx;
    auto r1 = fx.router("R1");
    r1.on_detection_tick(0);  // queries at t=0, no replies ever arrive

    auto actions = r1.on_detection_tick(500);
    auto marks = pick<MarkInactiveAction>(actions);
    CHECK(marks.size() == 3);  // all three neighbors silent
    CHECK(pick<SendAction>(actions).empty());
    for (const auto& e : r1.table().entries)
        CHECK(e.status == ConnectionStatus::Inactive);
}

TEST_CASE("a reply inside the period keeps the neighbor active") {
    Fixture fx;
    auto r1 = fx.router("R1");
    r1.on_detection_tick(0);
    r1.handle_frame(fx.fdm(MessageKind::Fdrm, "R3", "R1"), fx.id("R3"), 100);
    r1.handle_frame(fx.fdm(MessageKind::Fdrm, "GS1", "R1"), fx.id("GS1"), 100);
    r1.handle_frame(fx.fdm(MessageKind::Fdrm, "R2", "R1"), fx.id("R2"), 100);

    auto actions = r1.on_detection_tick(500);
    CHECK(pick<MarkInactiveAction>(actions).empty());
    CHECK(pick<SendAction>(actions).size() == 3);
}

TEST_CASE("inactive neighbors are excluded from the routine tick") {
    Fixture fx;
    auto r1 = fx.router("R1");
    r1.force_status(fx.id("R3"), ConnectionStatus::Inactive);
    auto sends = pick<SendAction>(r1.on_detection_tick(0));
    CHECK(sends.size() == 2);
    for (const auto& s : sends) CHECK(s.neighbor != fx.id("R3"));
}

TEST_CASE("fdqm yields one report and never the reverse") {
    Fixture fx;
    auto r3 = fx.router("R3");
    auto actions = r3.handle_frame(fx.fdm(MessageKind::Fdqm, "R1", "R3"), fx.id("R1"), 50);
    auto sends = pick<SendAction>(actions);
    REQUIRE(sends.size() == 1);
    CHECK(sends[0].frame.kind == MessageKind::Fdrm);
    CHECK(sends[0].frame.destination == fx.addr("R1"));
    CHECK(sends[0].neighbor == fx.id("R1"));

    // A report refreshes liveness only; no frame goes out.
    auto report = r3.handle_frame(fx.fdm(MessageKind::Fdrm, "R1", "R3"), fx.id("R1"), 60);
    CHECK(pick<SendAction>(report).empty());
}

TEST_CASE("data toward an inactive hop is buffered; fdrm releases it") {
    Fixture fx;
    auto r1 = fx.router("R1");
    r1.force_status(fx.id("R3"), ConnectionStatus::Inactive);

    Frame f = fx.data("GS1", "SW5-2", 7);
    auto actions = r1.handle_frame(f, fx.id("GS1"), 50);
    auto stores = pick<StoreAction>(actions);
    REQUIRE(stores.size() == 1);
    CHECK(stores[0].msg_id == 7);
    CHECK(stores[0].faulty == fx.id("R3"));
    CHECK(stores[0].deadline == 1050);
    auto probes = pick<ScheduleProbeAction>(actions);
    REQUIRE(probes.size() == 1);
    CHECK(probes[0].at == 50);  // first query leaves with the store
    CHECK(r1.remaining_capacity_bits() == fx.params.buffer_capacity_bits - 500);

    // Second message through the same faulty hop: stored, no second probe loop.
    auto actions2 = r1.handle_frame(fx.data("GS1", "SW5-3", 8), fx.id("GS1"), 60);
    CHECK(pick<StoreAction>(actions2).size() == 1);
    CHECK(pick<ScheduleProbeAction>(actions2).empty());
    CHECK(r1.buffered_count() == 2);

    // Recovery: the report releases both, in stored order.
    auto rel = r1.handle_frame(fx.fdm(MessageKind::Fdrm, "R3", "R1"), fx.id("R3"), 550);
    auto marks = pick<MarkActiveAction>(rel);
    REQUIRE(marks.size() == 1);
    auto releases = pick<ReleaseAction>(rel);
    REQUIRE(releases.size() == 1);
    CHECK(releases[0].msg_ids == std::vector<std::uint64_t>{7, 8});
    auto sends = pick<SendAction>(rel);
    REQUIRE(sends.size() == 2);
    CHECK(sends[0].frame.id == 7);
    CHECK(sends[1].frame.id == 8);
    CHECK(r1.buffered_count() == 0);
    CHECK(r1.remaining_capacity_bits() == fx.params.buffer_capacity_bits);
}

TEST_CASE("an oversized message is nacked instead of stored") {
    Fixture fx;
    fx.params.buffer_capacity_bits = 800;
    auto r1 = fx.router("R1");
    r1.force_status(fx.id("R3"), ConnectionStatus::Inactive);

    auto ok = r1.store_on_fault(fx.data("GS1", "SW5-2", 1, 500), fx.id("R3"), 50);
    CHECK(pick<StoreAction>(ok).size() == 1);

    // 500 of 800 bits used; the next 500-bit frame does not fit.
    auto full = r1.store_on_fault(fx.data("GS1", "SW5-3", 2, 500), fx.id("R3"), 60);
    CHECK(pick<StoreAction>(full).empty());
    auto nacks = pick<NackOriginated>(full);
    REQUIRE(nacks.size() == 1);
    CHECK(nacks[0].msg_id == 2);
    CHECK(nacks[0].original_sender == fx.addr("GS1"));
    // The NACK frame heads back toward the sender.
    auto sends = pick<SendAction>(full);
    REQUIRE(sends.size() == 1);
    CHECK(sends[0].frame.kind == MessageKind::Nack);
    CHECK(sends[0].frame.destination == fx.addr("GS1"));
    CHECK(sends[0].frame.id == 2);
    CHECK(r1.buffered_count() == 1);
    CHECK(r1.remaining_capacity_bits() == 300);
}

TEST_CASE("buffer timeout clears, restores capacity and nacks the sender") {
    Fixture fx;
    auto r1 = fx.router("R1");
    r1.force_status(fx.id("R3"), ConnectionStatus::Inactive);

    auto stored = r1.handle_frame(fx.data("GS1", "SW5-2", 9), fx.id("GS1"), 50);
    auto entry = pick<StoreAction>(stored).at(0);
    CHECK(entry.deadline == 1050);

    auto fired = r1.on_buffer_timeout(entry.entry_id, 1050);
    CHECK(pick<TimeoutAction>(fired).size() == 1);
    auto nacks = pick<NackOriginated>(fired);
    REQUIRE(nacks.size() == 1);
    CHECK(nacks[0].msg_id == 9);
    CHECK(r1.buffered_count() == 0);
    CHECK(r1.remaining_capacity_bits() == fx.params.buffer_capacity_bits);
    CHECK(r1.probing(fx.id("R3")));  // recovery detection continues

    // Stale timer after the entry is gone: no-op.
    auto stale = r1.on_buffer_timeout(entry.entry_id, 1050);
    CHECK(stale.empty());
}

TEST_CASE("stale timer after release is a no-op") {
    Fixture fx;
    auto r1 = fx.router("R1");
    r1.force_status(fx.id("R3"), ConnectionStatus::Inactive);
    auto stored = r1.handle_frame(fx.data("GS1", "SW5-2", 3), fx.id("GS1"), 50);
    auto entry = pick<StoreAction>(stored).at(0);

    r1.handle_frame(fx.fdm(MessageKind::Fdrm, "R3", "R1"), fx.id("R3"), 600);
    CHECK(r1.on_buffer_timeout(entry.entry_id, 1050).empty());
}

TEST_CASE("probe loop runs every period until the neighbor recovers") {
    Fixture fx;
    auto r1 = fx.router("R1");
    r1.force_status(fx.id("R3"), ConnectionStatus::Inactive);
    r1.handle_frame(fx.data("GS1", "SW5-2", 4), fx.id("GS1"), 50);

    auto tick1 = r1.on_probe_tick(fx.id("R3"), 50);
    auto sends = pick<SendAction>(tick1);
    REQUIRE(sends.size() == 1);
    CHECK(sends[0].frame.kind == MessageKind::Fdqm);
    CHECK(sends[0].neighbor == fx.id("R3"));
    auto next = pick<ScheduleProbeAction>(tick1);
    REQUIRE(next.size() == 1);
    CHECK(next[0].at == 550);

    // Recovered: the loop stops quietly.
    r1.handle_frame(fx.fdm(MessageKind::Fdrm, "R3", "R1"), fx.id("R3"), 540);
    CHECK(r1.on_probe_tick(fx.id("R3"), 550).empty());
    CHECK_FALSE(r1.probing(fx.id("R3")));
}

TEST_CASE("unknown destinations drop with no-route") {
    Fixture fx;
    auto r1 = fx.router("R1");
    Frame f = fx.data("GS1", "SW5-2", 5);
    f.destination = wire::Address::of(203, 99, 99, 99);
    auto actions = r1.handle_frame(f, fx.id("GS1"), 50);
    auto drops = pick<DropAction>(actions);
    REQUIRE(drops.size() == 1);
    CHECK(drops[0].reason == DropAction::Reason::NoRoute);
}

TEST_CASE("conventional routers drop instead of buffering") {
    Fixture fx;
    auto r1 = fx.router("R1", ProtocolKind::Conventional);
    r1.force_status(fx.id("R3"), ConnectionStatus::Inactive);
    auto actions = r1.handle_frame(fx.data("GS1", "SW5-2", 6), fx.id("GS1"), 50);
    auto drops = pick<DropAction>(actions);
    REQUIRE(drops.size() == 1);
    CHECK(drops[0].reason == DropAction::Reason::InactiveRoute);
    CHECK(pick<StoreAction>(actions).empty());
    CHECK(r1.buffered_count() == 0);

    // And they run no detection rounds.
    CHECK(r1.on_detection_tick(0).empty());
}

TEST_CASE("broadcast data fans out on every active interface but the arrival") {
    Fixture fx;
    auto r1 = fx.router("R1");
    Frame f = fx.data("GS1", "SW5-2", 1);
    f.destination = wire::Address::of(255, 255, 255, 255);
    auto sends = pick<SendAction>(r1.handle_frame(f, fx.id("GS1"), 50));
    REQUIRE(sends.size() == 2);  // toward R2 and R3, not back to GS1
    for (const auto& s : sends) CHECK(s.neighbor != fx.id("GS1"));
}

TEST_CASE("transitions are deterministic") {
    Fixture fx;
    auto a = fx.router("R1");
    auto b = fx.router("R1");
    a.force_status(fx.id("R3"), ConnectionStatus::Inactive);
    b.force_status(fx.id("R3"), ConnectionStatus::Inactive);
    Frame f = fx.data("GS1", "SW5-2", 11);
    auto x = a.handle_frame(f, fx.id("GS1"), 50);
    auto y = b.handle_frame(f, fx.id("GS1"), 50);
    REQUIRE(x.size() == y.size());
    CHECK(pick<StoreAction>(x).at(0).deadline == pick<StoreAction>(y).at(0).deadline);
    CHECK(a.remaining_capacity_bits() == b.remaining_capacity_bits());
}

TEST_CASE("sender retransmits on nack once per reporting device") {
    Fixture fx;
    SenderState sender(ProtocolKind::Ftn, SenderParams{});
    Frame f = fx.data("GS1", "SW5-2", 21);
    sender.on_send(f, 0);

    auto r1 = sender.on_nack(21, fx.addr("R1"), 1100);
    REQUIRE(r1.has_value());
    CHECK(r1->id == 21);
    // Duplicate NACK from the same device before any retransmission: ignored.
    CHECK_FALSE(sender.on_nack(21, fx.addr("R1"), 1100).has_value());

    sender.on_send(f, 1100);  // the retransmission clears the dedup latch
    CHECK(sender.retransmissions(21) == 1);
    CHECK(sender.on_nack(21, fx.addr("R1"), 2200).has_value());

    // Uncorrelated and post-ACK NACKs are ignored.
    CHECK_FALSE(sender.on_nack(99, fx.addr("R1"), 2200).has_value());
    sender.on_ack(21, 2500);
    CHECK_FALSE(sender.on_nack(21, fx.addr("R1"), 2600).has_value());
    CHECK(sender.acked(21));
    CHECK(sender.ack_time(21) == 2500);
}

TEST_CASE("conventional sender retransmits only after the timeout") {
    Fixture fx;
    SenderState sender(ProtocolKind::Conventional, SenderParams{});
    Frame f = fx.data("GS1", "SW5-2", 31);
    sender.on_send(f, 0);

    CHECK_FALSE(sender.on_retransmit_check(31, 1199).has_value());
    auto again = sender.on_retransmit_check(31, 1200);
    REQUIRE(again.has_value());
    sender.on_send(*again, 1200);

    // Acked: later checks do nothing.
    sender.on_ack(31, 1800);
    CHECK_FALSE(sender.on_retransmit_check(31, 2400).has_value());
    CHECK(sender.first_sent(31) == 0);
}
