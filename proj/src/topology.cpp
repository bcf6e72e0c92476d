#include "ftn/topology.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace ftn::topo {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::GroupServer: return "group_server";
        case NodeKind::Router: return "router";
        case NodeKind::Switch: return "switch";
        case NodeKind::Host: return "host";
    }
    return "?";
}

std::string_view to_string(CastClass c) {
    switch (c) {
        case CastClass::Unicast: return "unicast";
        case CastClass::Multicast: return "multicast";
        case CastClass::Broadcast: return "broadcast";
    }
    return "?";
}

const RouteEntry* RoutingTable::find(const wire::Address& dest) const {
    for (const auto& e : entries)
        if (e.network == dest) return &e;
    return nullptr;
}

RouteEntry* RoutingTable::find(const wire::Address& dest) {
    for (auto& e : entries)
        if (e.network == dest) return &e;
    return nullptr;
}

std::vector<const RouteEntry*> RoutingTable::direct_entries() const {
    std::vector<const RouteEntry*> out;
    for (const auto& e : entries)
        if (e.type == ConnectionType::Direct) out.push_back(&e);
    std::sort(out.begin(), out.end(), [](const RouteEntry* a, const RouteEntry* b) {
        return a->interface < b->interface;
    });
    return out;
}

NodeId Topology::find_node(std::string_view name) const {
    for (const auto& n : nodes)
        if (n.name == name) return n.id;
    return kNoNode;
}

std::optional<NodeId> Topology::node_by_address(const wire::Address& a) const {
    for (const auto& n : nodes)
        if (n.address == a) return n.id;
    return std::nullopt;
}

bool Topology::is_routing_device(NodeId id) const {
    NodeKind k = node(id).kind;
    return k == NodeKind::GroupServer || k == NodeKind::Router;
}

std::vector<std::pair<NodeId, std::size_t>> Topology::neighbors(NodeId id) const {
    std::vector<std::pair<NodeId, std::size_t>> out;
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i].a == id) out.emplace_back(links[i].b, i);
        else if (links[i].b == id) out.emplace_back(links[i].a, i);
    }
    std::sort(out.begin(), out.end(), [this](const auto& x, const auto& y) {
        return node(x.first).name < node(y.first).name;
    });
    return out;
}

std::size_t Topology::link_between(NodeId a, NodeId b) const {
    for (std::size_t i = 0; i < links.size(); ++i)
        if (links[i].joins(a, b)) return i;
    throw std::invalid_argument("no link between " + node(a).name + " and " + node(b).name);
}

Topology build_paper_topology(int hosts_per_switch) {
    if (hosts_per_switch < 0) throw std::invalid_argument("hosts_per_switch must be >= 0");

    Topology t;
    auto add = [&t](std::string name, NodeKind kind, wire::Address addr) {
        NodeId id = static_cast<NodeId>(t.nodes.size());
        t.nodes.push_back(Node{id, std::move(name), kind, addr});
        return id;
    };

    NodeId gs1 = add("GS1", NodeKind::GroupServer, wire::Address::of(10, 0, 0, 1));
    NodeId r[8] = {kNoNode};
    for (int i = 1; i <= 7; ++i)
        r[i] = add("R" + std::to_string(i), NodeKind::Router,
                   wire::Address::of(10, 0, static_cast<std::uint8_t>(i), 1));
    NodeId sw[6] = {kNoNode};
    for (int i = 1; i <= 5; ++i)
        sw[i] = add("SW" + std::to_string(i), NodeKind::Switch,
                    wire::Address::of(10, static_cast<std::uint8_t>(i), 0, 1));

    auto link = [&t](NodeId a, NodeId b) { t.links.push_back(Link{a, b}); };
    link(gs1, r[1]);
    link(r[1], r[2]);
    link(r[1], r[3]);
    link(r[2], r[4]);
    link(r[2], r[5]);
    link(r[4], sw[1]);
    link(r[5], sw[2]);
    link(r[3], sw[4]);
    link(r[3], r[6]);
    link(r[6], sw[3]);
    link(r[6], r[7]);
    link(r[7], sw[5]);

    for (int s = 1; s <= 5; ++s) {
        for (int h = 1; h <= hosts_per_switch; ++h) {
            NodeId host = add("SW" + std::to_string(s) + "-" + std::to_string(h),
                              NodeKind::Host,
                              wire::Address::of(10, static_cast<std::uint8_t>(s), 0,
                                                static_cast<std::uint8_t>(1 + h)));
            link(sw[s], host);
        }
    }

    derive_routing_tables(t);
    return t;
}

namespace {

// BFS parents from `root` over up links; kNoNode for unreachable nodes.
std::vector<NodeId> bfs_parents(const Topology& t, NodeId root) {
    std::vector<NodeId> parent(t.nodes.size(), kNoNode);
    std::vector<char> seen(t.nodes.size(), 0);
    std::deque<NodeId> queue{root};
    seen[static_cast<std::size_t>(root)] = 1;
    while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        for (const auto& [next, li] : t.neighbors(cur)) {
            (void)li;
            if (!seen[static_cast<std::size_t>(next)]) {
                seen[static_cast<std::size_t>(next)] = 1;
                parent[static_cast<std::size_t>(next)] = cur;
                queue.push_back(next);
            }
        }
    }
    return parent;
}

}  // namespace

void derive_routing_tables(Topology& t) {
    // Tree check over the whole graph (hosts are leaves, so including them
    // preserves tree-ness): connected and |E| = |V| - 1.
    if (t.nodes.empty()) throw std::invalid_argument("empty topology");
    if (t.links.size() != t.nodes.size() - 1)
        throw std::invalid_argument("ambiguous routes: link graph is not a tree");
    auto parents = bfs_parents(t, 0);
    for (const auto& n : t.nodes)
        if (n.id != 0 && parents[static_cast<std::size_t>(n.id)] == kNoNode)
            throw std::invalid_argument("ambiguous routes: graph is disconnected");

    t.tables.assign(t.nodes.size(), RoutingTable{});
    for (const auto& dev : t.nodes) {
        if (!t.is_routing_device(dev.id)) continue;
        RoutingTable table;
        table.owner = dev.id;

        auto nbrs = t.neighbors(dev.id);
        std::map<NodeId, int> iface_of;
        int iface = 1;
        for (const auto& [nbr, li] : nbrs) {
            (void)li;
            iface_of[nbr] = iface;
            RouteEntry e;
            e.network = t.node(nbr).address;
            e.interface = iface;
            e.type = ConnectionType::Direct;
            e.via = nbr;
            e.target = nbr;
            table.entries.push_back(e);
            ++iface;
        }

        // First hop toward every other node via BFS from this device.
        auto parent = bfs_parents(t, dev.id);
        std::vector<const Node*> rest;
        for (const auto& other : t.nodes) {
            if (other.id == dev.id || iface_of.count(other.id)) continue;
            rest.push_back(&other);
        }
        std::sort(rest.begin(), rest.end(),
                  [](const Node* a, const Node* b) { return a->name < b->name; });
        for (const Node* other : rest) {
            NodeId hop = other->id;
            while (parent[static_cast<std::size_t>(hop)] != dev.id)
                hop = parent[static_cast<std::size_t>(hop)];
            RouteEntry e;
            e.network = other->address;
            e.next_hop = t.node(hop).address;
            e.interface = iface_of.at(hop);
            e.type = ConnectionType::Indirect;
            e.via = hop;
            e.target = other->id;
            table.entries.push_back(e);
        }
        t.tables[static_cast<std::size_t>(dev.id)] = std::move(table);
    }
}

NextHop next_hop(const RoutingTable& table, const wire::Address& dest) {
    const RouteEntry* e = table.find(dest);
    if (!e) return NextHop{NextHop::State::NoRoute, 0, kNoNode};
    if (e->status == ConnectionStatus::Inactive)
        return NextHop{NextHop::State::Inactive, e->interface, e->via};
    return NextHop{NextHop::State::Ok, e->interface, e->via};
}

void set_status(RoutingTable& table, NodeId neighbor, ConnectionStatus s) {
    bool direct = false;
    for (const auto& e : table.entries)
        if (e.type == ConnectionType::Direct && e.via == neighbor) direct = true;
    if (!direct)
        throw std::invalid_argument("set_status: node is not a direct neighbor");
    for (auto& e : table.entries)
        if (e.via == neighbor) e.status = s;
}

CastClass map_destination(const wire::Address& d) {
    if (d == wire::Address::of(255, 255, 255, 255)) return CastClass::Broadcast;
    if (d.octets[0] >= 224 && d.octets[0] <= 239) return CastClass::Multicast;
    return CastClass::Unicast;
}

std::vector<std::pair<int, NodeId>> find_interfaces(const RoutingTable& table,
                                                    const wire::Address& dest,
                                                    CastClass cast,
                                                    int arrival_interface) {
    std::vector<std::pair<int, NodeId>> out;
    if (cast == CastClass::Unicast) {
        NextHop nh = next_hop(table, dest);
        if (nh.state == NextHop::State::Ok) out.emplace_back(nh.interface, nh.neighbor);
        return out;
    }
    // Multicast fans out like broadcast: no group membership is modeled.
    for (const RouteEntry* e : table.direct_entries()) {
        if (e->interface == arrival_interface) continue;
        if (e->status != ConnectionStatus::Active) continue;
        out.emplace_back(e->interface, e->via);
    }
    return out;
}

std::vector<NodeId> path(const Topology& t, NodeId a, NodeId b) {
    auto parent = bfs_parents(t, a);
    if (a != b && parent[static_cast<std::size_t>(b)] == kNoNode) return {};
    std::vector<NodeId> out;
    for (NodeId cur = b; cur != a; cur = parent[static_cast<std::size_t>(cur)])
        out.push_back(cur);
    out.push_back(a);
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace ftn::topo
