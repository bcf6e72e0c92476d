#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftn/wire.hpp"

namespace ftn::topo {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class NodeKind { GroupServer, Router, Switch, Host };

std::string_view to_string(NodeKind kind);

struct Node {
    NodeId id = kNoNode;
    std::string name;
    NodeKind kind = NodeKind::Host;
    wire::Address address;
};

struct Link {
    NodeId a = kNoNode;
    NodeId b = kNoNode;
    std::int64_t propagation_ms = 50;
    std::int64_t capacity_bps = 1'000'000;
    bool up = true;

    NodeId other(NodeId n) const { return n == a ? b : a; }
    bool joins(NodeId x, NodeId y) const {
        return (a == x && b == y) || (a == y && b == x);
    }
};

enum class ConnectionType { Direct, Indirect };
enum class ConnectionStatus { Inactive = 0, Active = 1 };

struct RouteEntry {
    wire::Address network;                  // destination device address
    std::optional<wire::Address> next_hop;  // empty for Direct entries
    int interface = 0;
    ConnectionType type = ConnectionType::Direct;
    ConnectionStatus status = ConnectionStatus::Active;
    NodeId via = kNoNode;     // direct neighbor this entry forwards through
    NodeId target = kNoNode;  // node this entry addresses
};

struct RoutingTable {
    NodeId owner = kNoNode;
    std::vector<RouteEntry> entries;

    const RouteEntry* find(const wire::Address& dest) const;
    RouteEntry* find(const wire::Address& dest);
    // Direct entries, ordered by interface number.
    std::vector<const RouteEntry*> direct_entries() const;
};

struct NextHop {
    enum class State { Ok, Inactive, NoRoute };
    State state = State::NoRoute;
    int interface = 0;
    NodeId neighbor = kNoNode;
};

enum class CastClass { Unicast, Multicast, Broadcast };

std::string_view to_string(CastClass c);

struct Topology {
    std::vector<Node> nodes;
    std::vector<Link> links;
    std::vector<RoutingTable> tables;  // indexed by NodeId; empty for switches/hosts

    NodeId find_node(std::string_view name) const;  // kNoNode when absent
    const Node& node(NodeId id) const { return nodes[static_cast<std::size_t>(id)]; }
    std::optional<NodeId> node_by_address(const wire::Address&) const;
    bool is_routing_device(NodeId id) const;

    // Neighbors sorted by name; second element is the index into links.
    std::vector<std::pair<NodeId, std::size_t>> neighbors(NodeId id) const;
    std::size_t link_between(NodeId a, NodeId b) const;  // throws when absent
};

// The fixed hierarchy: GS1 over R1; R1 over R2 and R3; R2 over R4 and R5;
// R3 over SW4 and R6; R6 over SW3 and R7; R7 over SW5; R4 over SW1; R5 over
// SW2. Every switch carries `hosts_per_switch` hosts named "SWk-i". All
// links 50 ms propagation, 1 Mbps, up.
Topology build_paper_topology(int hosts_per_switch = 3);

// Fills `tables` for every routing device: one Direct entry per attached
// link (interfaces numbered 1..deg in neighbor-name order) and one Indirect
// entry per other reachable node, inheriting the first tree hop's interface.
// Throws std::invalid_argument when the infrastructure graph is not a tree.
void derive_routing_tables(Topology& t);

// Forwarding lookup. NoRoute when no entry matches the destination;
// Inactive when the matching entry's connection status is 0.
NextHop next_hop(const RoutingTable& table, const wire::Address& dest);

// Flips the Direct entry for `neighbor` and every Indirect entry routed
// through it. Throws std::invalid_argument when `neighbor` is not directly
// connected.
void set_status(RoutingTable& table, NodeId neighbor, ConnectionStatus s);

// 255.255.255.255 -> Broadcast; first octet 224..239 -> Multicast.
CastClass map_destination(const wire::Address& d);

// Interfaces a frame fans out on. Unicast: singleton or empty (invalid
// route). Broadcast/Multicast: every Active Direct interface except
// `arrival_interface` (pass 0 for locally originated frames).
std::vector<std::pair<int, NodeId>> find_interfaces(const RoutingTable& table,
                                                    const wire::Address& dest,
                                                    CastClass cast,
                                                    int arrival_interface);

// Unique tree path a..b inclusive; empty when disconnected.
std::vector<NodeId> path(const Topology& t, NodeId a, NodeId b);

}  // namespace ftn::topo
