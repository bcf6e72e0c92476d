#include "ftn/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <variant>

namespace ftn::engine {

using protocol::Frame;
using protocol::ProtocolKind;
using protocol::RouterState;
using protocol::SenderState;
using topo::NodeId;
using wire::MessageKind;

std::string FaultSpec::label() const {
    if (kind == Kind::Node) return node;
    return link_a + "|" + link_b;
}

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error(issues.empty() ? "invalid scenario"
                                        : "invalid scenario: " + issues.front()),
      issues_(std::move(issues)) {}

std::vector<std::string> validate(const Scenario& sc) {
    std::vector<std::string> out;
    const auto& t = sc.topology;

    if (t.nodes.empty()) {
        out.push_back("topology: no nodes");
        return out;
    }
    if (t.tables.size() != t.nodes.size())
        out.push_back("topology: routing tables not derived");

    std::set<std::string> names;
    std::set<wire::Address> addrs;
    for (const auto& n : t.nodes) {
        if (!names.insert(n.name).second)
            out.push_back("topology: duplicate node name " + n.name);
        if (!addrs.insert(n.address).second)
            out.push_back("topology: duplicate address " + n.address.str());
    }
    for (const auto& n : t.nodes) {
        auto nbrs = t.neighbors(n.id);
        if (n.kind == topo::NodeKind::Host) {
            if (nbrs.size() != 1 || t.node(nbrs[0].first).kind != topo::NodeKind::Switch)
                out.push_back("topology: host " + n.name +
                              " must attach to exactly one switch");
        } else if (n.kind == topo::NodeKind::Switch) {
            int infra = 0;
            for (const auto& [nbr, li] : nbrs) {
                (void)li;
                if (t.node(nbr).kind != topo::NodeKind::Host) ++infra;
            }
            if (infra != 1)
                out.push_back("topology: switch " + n.name +
                              " must have exactly one uplink");
        }
    }

    if (sc.ftn.qm_period_ms <= 0) out.push_back("params.qm_period_ms: must be > 0");
    if (sc.ftn.buffer_timeout_ms <= 0)
        out.push_back("params.buffer_timeout_ms: must be > 0");
    if (sc.ftn.buffer_capacity_bits <= 0)
        out.push_back("params.buffer_capacity_bits: must be > 0");
    if (sc.sender.retransmit_timeout_ms <= 0)
        out.push_back("params.retransmit_timeout_ms: must be > 0");
    if (sc.horizon_ms <= 0) out.push_back("params.horizon_ms: must be > 0");

    if (sc.traffic.empty()) out.push_back("traffic: at least one spec required");
    for (std::size_t i = 0; i < sc.traffic.size(); ++i) {
        const auto& ts = sc.traffic[i];
        const std::string at = "traffic[" + std::to_string(i) + "].";
        NodeId snd = t.find_node(ts.sender);
        if (snd == topo::kNoNode)
            out.push_back(at + "sender: unknown node " + ts.sender);
        else if (t.node(snd).kind == topo::NodeKind::Switch)
            out.push_back(at + "sender: switches do not originate traffic");
        if (t.find_node(ts.destination) == topo::kNoNode &&
            !wire::Address::parse(ts.destination))
            out.push_back(at + "destination: neither a node name nor an address: " +
                          ts.destination);
        if (ts.sender == ts.destination)
            out.push_back(at + "destination: must differ from sender");
        if (ts.frame_bits < 1 || ts.frame_bits > 12'000)
            out.push_back(at + "frame_bits: must be within 1..12000");
        if (ts.start_ms < 0) out.push_back(at + "start_ms: must be >= 0");
        if (ts.count < 1) out.push_back(at + "count: must be >= 1");
        if (ts.count > 1 && !(ts.frame_rate_fps > 0))
            out.push_back(at + "frame_rate_fps: required when count > 1");
    }

    std::map<std::string, std::vector<std::pair<Millis, Millis>>> windows;
    for (std::size_t i = 0; i < sc.faults.size(); ++i) {
        const auto& f = sc.faults[i];
        const std::string at = "faults[" + std::to_string(i) + "].";
        if (f.kind == FaultSpec::Kind::Node) {
            NodeId n = t.find_node(f.node);
            if (n == topo::kNoNode) out.push_back(at + "node: unknown node " + f.node);
        } else {
            NodeId a = t.find_node(f.link_a);
            NodeId b = t.find_node(f.link_b);
            if (a == topo::kNoNode || b == topo::kNoNode) {
                out.push_back(at + "link: unknown endpoint");
            } else {
                bool found = false;
                for (const auto& l : t.links)
                    if (l.joins(a, b)) found = true;
                if (!found)
                    out.push_back(at + "link: no link " + f.link_a + "-" + f.link_b);
            }
        }
        if (f.start_ms < 0) out.push_back(at + "start_ms: must be >= 0");
        if (f.duration_ms < 0) out.push_back(at + "duration_ms: must be >= 0");
        if (f.duration_ms > 0)
            windows[f.label()].emplace_back(f.start_ms, f.start_ms + f.duration_ms);
    }
    for (auto& [label, w] : windows) {
        std::sort(w.begin(), w.end());
        for (std::size_t i = 1; i < w.size(); ++i)
            if (w[i].first < w[i - 1].second)
                out.push_back("faults: overlapping intervals for target " + label);
    }
    return out;
}

namespace {

// Same-timestamp ordering: fault state changes settle first, then frame
// deliveries, then timers. Arrivals preceding buffer deadlines is what lets
// a report that lands exactly on the deadline release the buffer instead of
// NACKing (fault duration 1.0 s in the faulty-router experiment).
enum EventPriority : int {
    kPrioFault = 0,
    kPrioArrival = 1,
    kPrioInject = 2,
    kPrioDetectionTick = 3,
    kPrioProbeTick = 4,
    kPrioBufferDeadline = 5,
    kPrioRetransmitCheck = 6,
};

struct FrameArrival {
    NodeId to = topo::kNoNode;
    NodeId from = topo::kNoNode;
    Frame frame;
    Millis departed = 0;
    std::size_t link_idx = 0;
};
struct DetectionTick { NodeId router = topo::kNoNode; };
struct ProbeTick { NodeId router = topo::kNoNode; NodeId neighbor = topo::kNoNode; };
struct BufferDeadline { NodeId router = topo::kNoNode; std::uint64_t entry_id = 0; };
struct RetransmitCheck { NodeId node = topo::kNoNode; std::uint64_t msg_id = 0; };
struct FaultStart { std::size_t fault_idx = 0; };
struct FaultEnd { std::size_t fault_idx = 0; };
struct Inject { std::size_t spec_idx = 0; std::int64_t frame_idx = 0; std::uint64_t msg_id = 0; };

using EventPayload = std::variant<FrameArrival, DetectionTick, ProbeTick, BufferDeadline,
                                  RetransmitCheck, FaultStart, FaultEnd, Inject>;

struct Event {
    Millis time = 0;
    int prio = 0;
    std::uint64_t seq = 0;
    EventPayload payload;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.prio != b.prio) return a.prio > b.prio;
        return a.seq > b.seq;
    }
};

struct MsgInfo {
    std::uint64_t id = 0;
    std::string sender;
    std::string destination;
    std::int64_t frame_bits = 0;
    Millis injected_ms = -1;
    Millis delivered_ms = -1;
    Millis acked_ms = -1;
    int nacks = 0;
    bool terminal = false;
    bool unicast = true;
};

class Sim {
public:
    explicit Sim(const Scenario& sc) : sc_(sc), topo_(sc.topology) {}

    RunResult run();

private:
    void record(Millis t, const std::string& node, const char* event,
                std::uint64_t msg_id = 0, std::string detail = {}) {
        trace_.push_back(TraceRecord{t, node, event, msg_id, std::move(detail)});
    }
    const std::string& name(NodeId n) const { return topo_.node(n).name; }

    void schedule(Millis time, int prio, EventPayload payload) {
        queue_.push(Event{time, prio, next_seq_++, std::move(payload)});
    }

    bool quiescent() const {
        return nonterminal_msgs_ == 0 && pending_frames_ == 0 &&
               pending_injections_ == 0 && pending_faults_ == 0;
    }

    Millis transmission_ms(std::int64_t size_bits, std::int64_t capacity_bps) const {
        // Whole-millisecond clock; sub-millisecond serialization time is
        // negligible at the experiment's 500-bit frames.
        return size_bits * 1000 / capacity_bps;
    }

    void send_frame(NodeId from, NodeId to, const Frame& f, Millis now);
    void apply_actions(NodeId router, const std::vector<protocol::Action>& actions,
                       Millis now);
    void emit_fdrm_reply(NodeId node, NodeId to, Millis now);
    void consume(NodeId node, const Frame& f, Millis now);
    void endpoint_send(NodeId node, const Frame& f, Millis now, bool register_send);
    void switch_forward(NodeId sw, NodeId from, const Frame& f, Millis now);
    void force_neighbor_status(NodeId target, topo::ConnectionStatus s, Millis now);
    Millis repair_time(const std::string& label, Millis now) const;
    void mark_delivered(const Frame& f, NodeId at, Millis now);
    void mark_terminal(std::uint64_t id);

    void on_arrival(const FrameArrival& ev, Millis now);
    void on_fault_start(std::size_t idx, Millis now);
    void on_fault_end(std::size_t idx, Millis now);
    void on_inject(const Inject& ev, Millis now);

    const Scenario& sc_;
    const topo::Topology& topo_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_seq_ = 0;

    std::vector<TraceRecord> trace_;
    RunStats stats_;

    std::map<NodeId, RouterState> routers_;
    std::map<NodeId, SenderState> senders_;
    std::vector<char> node_down_;
    std::vector<char> link_down_;
    std::map<NodeId, std::vector<std::pair<NodeId, Frame>>> pending_fdqm_;
    std::vector<std::vector<Millis>> link_fault_starts_;
    std::map<std::pair<std::size_t, NodeId>, Millis> link_free_at_;

    std::map<std::uint64_t, MsgInfo> msgs_;
    std::int64_t nonterminal_msgs_ = 0;
    std::int64_t pending_frames_ = 0;
    std::int64_t pending_injections_ = 0;
    std::int64_t pending_faults_ = 0;
};

void Sim::mark_terminal(std::uint64_t id) {
    auto& m = msgs_.at(id);
    if (!m.terminal) {
        m.terminal = true;
        --nonterminal_msgs_;
    }
}

void Sim::send_frame(NodeId from, NodeId to, const Frame& f, Millis now) {
    std::size_t li = topo_.link_between(from, to);
    if (link_down_[li]) {
        record(now, name(from), "Lost", f.id,
               "link_down_at_send;link=" + name(from) + "|" + name(to));
        return;
    }
    const auto& link = topo_.links[li];
    Millis td = transmission_ms(f.size_bits, link.capacity_bps);
    auto key = std::make_pair(li, from);
    Millis depart = now;
    auto it = link_free_at_.find(key);
    if (it != link_free_at_.end() && it->second > depart) depart = it->second;
    link_free_at_[key] = depart + td;
    Millis arrival = depart + td + link.propagation_ms;
    ++pending_frames_;
    schedule(arrival, kPrioArrival, FrameArrival{to, from, f, depart, li});
}

void Sim::apply_actions(NodeId router, const std::vector<protocol::Action>& actions,
                        Millis now) {
    auto& rs = routers_.at(router);
    for (const auto& action : actions) {
        if (const auto* send = std::get_if<protocol::SendAction>(&action)) {
            const char* event = send->frame.kind == MessageKind::Fdqm ? "FdqmSent"
                                : send->frame.kind == MessageKind::Fdrm ? "FdrmSent"
                                                                        : "Forwarded";
            record(now, name(router), event, send->frame.id,
                   "to=" + name(send->neighbor));
            send_frame(router, send->neighbor, send->frame, now);
        } else if (const auto* store = std::get_if<protocol::StoreAction>(&action)) {
            record(now, name(router), "Buffered", store->msg_id,
                   "next_hop=" + name(store->faulty) +
                       ";deadline=" + std::to_string(store->deadline));
            stats_.last_buffer_deadline_ms =
                std::max(stats_.last_buffer_deadline_ms, store->deadline);
            schedule(store->deadline, kPrioBufferDeadline,
                     BufferDeadline{router, store->entry_id});
        } else if (const auto* rel = std::get_if<protocol::ReleaseAction>(&action)) {
            for (std::uint64_t id : rel->msg_ids)
                record(now, name(router), "Released", id,
                       "next_hop=" + name(rel->neighbor));
        } else if (const auto* to = std::get_if<protocol::TimeoutAction>(&action)) {
            record(now, name(router), "TimedOut", to->msg_id,
                   "entry=" + std::to_string(to->entry_id));
        } else if (const auto* nack = std::get_if<protocol::NackOriginated>(&action)) {
            // The NACK frame's own Forwarded/Buffered records follow — except
            // when the buffering device is itself the source: then the sender
            // machinery is notified in place.
            if (nack->original_sender == topo_.node(router).address) {
                Frame self_nack;
                self_nack.kind = MessageKind::Nack;
                self_nack.sender = topo_.node(router).address;
                self_nack.destination = nack->original_sender;
                self_nack.id = nack->msg_id;
                consume(router, self_nack, now);
            }
        } else if (const auto* drop = std::get_if<protocol::DropAction>(&action)) {
            record(now, name(router), "Lost", drop->msg_id,
                   drop->reason == protocol::DropAction::Reason::NoRoute
                       ? "no_route"
                       : "next_hop_inactive");
        } else if (const auto* ma = std::get_if<protocol::MarkActiveAction>(&action)) {
            record(now, name(router), "MarkedActive", 0, "neighbor=" + name(ma->neighbor));
        } else if (const auto* mi = std::get_if<protocol::MarkInactiveAction>(&action)) {
            record(now, name(router), "MarkedInactive", 0,
                   "neighbor=" + name(mi->neighbor));
        } else if (const auto* probe = std::get_if<protocol::ScheduleProbeAction>(&action)) {
            schedule(probe->at, kPrioProbeTick, ProbeTick{router, probe->neighbor});
        }
    }
    stats_.min_remaining_buffer_bits =
        std::min(stats_.min_remaining_buffer_bits, rs.remaining_capacity_bits());
}

void Sim::emit_fdrm_reply(NodeId node, NodeId to, Millis now) {
    Frame rm;
    rm.kind = MessageKind::Fdrm;
    rm.sender = topo_.node(node).address;
    rm.destination = topo_.node(to).address;
    record(now, name(node), "FdrmSent", 0, "to=" + name(to));
    send_frame(node, to, rm, now);
}

void Sim::mark_delivered(const Frame& f, NodeId at, Millis now) {
    record(now, name(at), "Delivered", f.id, "from=" + f.sender.str());
    auto it = msgs_.find(f.id);
    if (it == msgs_.end()) return;
    MsgInfo& m = it->second;
    if (m.delivered_ms < 0) m.delivered_ms = now;
    if (!m.unicast || !sc_.ack_enabled) mark_terminal(f.id);
}

void Sim::consume(NodeId node, const Frame& f, Millis now) {
    if (f.kind == MessageKind::Nack) {
        auto snd = senders_.find(node);
        auto reply = snd == senders_.end()
                         ? std::nullopt
                         : snd->second.on_nack(f.id, f.sender, now);
        auto it = msgs_.find(f.id);
        if (snd == senders_.end() || it == msgs_.end()) {
            record(now, name(node), "Lost", f.id, "uncorrelated_nack");
            return;
        }
        record(now, name(node), "Nacked", f.id, "from=" + f.sender.str());
        it->second.nacks += 1;
        if (reply) {
            record(now, name(node), "Retransmitted", f.id,
                   "attempt=" + std::to_string(snd->second.retransmissions(f.id) + 2));
            stats_.last_retransmit_ms = std::max(stats_.last_retransmit_ms, now);
            endpoint_send(node, *reply, now, true);
        }
        return;
    }
    if (f.is_ack) {
        auto snd = senders_.find(node);
        if (snd == senders_.end() || snd->second.acked(f.id)) return;
        snd->second.on_ack(f.id, now);
        record(now, name(node), "AckDelivered", f.id, {});
        auto it = msgs_.find(f.id);
        if (it != msgs_.end()) {
            it->second.acked_ms = now;
            mark_terminal(f.id);
        }
        return;
    }
    // Plain data reaching its endpoint.
    mark_delivered(f, node, now);
    if (sc_.ack_enabled && topo::map_destination(f.destination) == topo::CastClass::Unicast) {
        Frame ack;
        ack.kind = MessageKind::Data;
        ack.sender = topo_.node(node).address;
        ack.destination = f.sender;
        ack.size_bits = 72;
        ack.id = f.id;
        ack.is_ack = true;
        endpoint_send(node, ack, now, false);
    }
}

void Sim::endpoint_send(NodeId node, const Frame& f, Millis now, bool register_send) {
    if (register_send) {
        auto [it, inserted] = senders_.try_emplace(node, sc_.protocol, sc_.sender);
        (void)inserted;
        it->second.on_send(f, now);
        if (sc_.protocol == ProtocolKind::Conventional)
            schedule(now + sc_.sender.retransmit_timeout_ms, kPrioRetransmitCheck,
                     RetransmitCheck{node, f.id});
    }
    auto rs = routers_.find(node);
    if (rs != routers_.end()) {
        apply_actions(node, rs->second.originate(f, now), now);
        return;
    }
    // Hosts reach the network through their switch.
    auto nbrs = topo_.neighbors(node);
    if (!nbrs.empty()) send_frame(node, nbrs[0].first, f, now);
}

void Sim::switch_forward(NodeId sw, NodeId from, const Frame& f, Millis now) {
    auto nbrs = topo_.neighbors(sw);
    topo::CastClass cast = topo::map_destination(f.destination);
    if (cast != topo::CastClass::Unicast) {
        for (const auto& [nbr, li] : nbrs) {
            (void)li;
            if (nbr == from) continue;
            record(now, name(sw), "Forwarded", f.id, "to=" + name(nbr));
            send_frame(sw, nbr, f, now);
        }
        return;
    }
    NodeId uplink = topo::kNoNode;
    NodeId local = topo::kNoNode;
    for (const auto& [nbr, li] : nbrs) {
        (void)li;
        if (topo_.node(nbr).kind == topo::NodeKind::Host) {
            if (topo_.node(nbr).address == f.destination) local = nbr;
        } else {
            uplink = nbr;
        }
    }
    NodeId out = local != topo::kNoNode ? local : uplink;
    if (out == topo::kNoNode || out == from) {
        record(now, name(sw), "Lost", f.id, "no_route_at_switch");
        return;
    }
    record(now, name(sw), "Forwarded", f.id, "to=" + name(out));
    send_frame(sw, out, f, now);
}

void Sim::force_neighbor_status(NodeId target, topo::ConnectionStatus s, Millis now) {
    for (const auto& [nbr, li] : topo_.neighbors(target)) {
        (void)li;
        auto rs = routers_.find(nbr);
        if (rs == routers_.end()) continue;
        if (rs->second.force_status(target, s))
            record(now, name(nbr),
                   s == topo::ConnectionStatus::Active ? "MarkedActive" : "MarkedInactive",
                   0, "neighbor=" + name(target));
    }
}

Millis Sim::repair_time(const std::string& label, Millis now) const {
    for (const auto& f : sc_.faults)
        if (f.label() == label && f.start_ms <= now && now < f.start_ms + f.duration_ms)
            return f.start_ms + f.duration_ms;
    return now + 1;
}

void Sim::on_fault_start(std::size_t idx, Millis now) {
    --pending_faults_;
    const auto& f = sc_.faults[idx];
    if (f.kind == FaultSpec::Kind::Node) {
        NodeId n = topo_.find_node(f.node);
        record(now, name(n), "FaultStart", 0, "node");
        node_down_[static_cast<std::size_t>(n)] = 1;
        // Fault onset is where the experiments start the clock: the
        // neighbors' connection-status bits are already 0 when traffic hits
        // them, so the flip happens with the fault itself.
        force_neighbor_status(n, topo::ConnectionStatus::Inactive, now);
    } else {
        NodeId a = topo_.find_node(f.link_a);
        NodeId b = topo_.find_node(f.link_b);
        std::size_t li = topo_.link_between(a, b);
        record(now, f.label(), "FaultStart", 0, "link");
        link_down_[li] = 1;
        link_fault_starts_[li].push_back(now);
        if (sc_.protocol == ProtocolKind::Conventional) {
            auto ra = routers_.find(a);
            auto rb = routers_.find(b);
            if (ra != routers_.end() && ra->second.force_status(b, topo::ConnectionStatus::Inactive))
                record(now, name(a), "MarkedInactive", 0, "neighbor=" + name(b));
            if (rb != routers_.end() && rb->second.force_status(a, topo::ConnectionStatus::Inactive))
                record(now, name(b), "MarkedInactive", 0, "neighbor=" + name(a));
        }
        // FTN endpoints learn of a dead link from the missing reports.
    }
}

void Sim::on_fault_end(std::size_t idx, Millis now) {
    --pending_faults_;
    const auto& f = sc_.faults[idx];
    if (f.kind == FaultSpec::Kind::Node) {
        NodeId n = topo_.find_node(f.node);
        if (!node_down_[static_cast<std::size_t>(n)]) {
            record(now, name(n), "FaultEnd", 0, "no_op_already_up");
            return;
        }
        node_down_[static_cast<std::size_t>(n)] = 0;
        record(now, name(n), "FaultEnd", 0, "node");

        if (sc_.protocol == ProtocolKind::Ftn) {
            // Repaired device answers every query it sat on, immediately.
            auto queued = pending_fdqm_.find(n);
            if (queued != pending_fdqm_.end()) {
                for (const auto& [from, qm] : queued->second) {
                    (void)qm;
                    emit_fdrm_reply(n, from, now);
                }
                queued->second.clear();
            }
            auto rs = routers_.find(n);
            if (rs != routers_.end()) {
                rs->second.reset_detection();
                for (std::uint64_t entry : rs->second.expired_entries(now))
                    schedule(now, kPrioBufferDeadline, BufferDeadline{n, entry});
            }
        } else {
            force_neighbor_status(n, topo::ConnectionStatus::Active, now);
        }
    } else {
        NodeId a = topo_.find_node(f.link_a);
        NodeId b = topo_.find_node(f.link_b);
        std::size_t li = topo_.link_between(a, b);
        if (!link_down_[li]) {
            record(now, f.label(), "FaultEnd", 0, "no_op_already_up");
            return;
        }
        link_down_[li] = 0;
        record(now, f.label(), "FaultEnd", 0, "link");
        if (sc_.protocol == ProtocolKind::Conventional) {
            auto ra = routers_.find(a);
            auto rb = routers_.find(b);
            if (ra != routers_.end() && ra->second.force_status(b, topo::ConnectionStatus::Active))
                record(now, name(a), "MarkedActive", 0, "neighbor=" + name(b));
            if (rb != routers_.end() && rb->second.force_status(a, topo::ConnectionStatus::Active))
                record(now, name(b), "MarkedActive", 0, "neighbor=" + name(a));
        }
    }
}

void Sim::on_inject(const Inject& ev, Millis now) {
    --pending_injections_;
    const auto& ts = sc_.traffic[ev.spec_idx];
    NodeId snd = topo_.find_node(ts.sender);

    Frame f;
    f.kind = MessageKind::Data;
    f.sender = topo_.node(snd).address;
    NodeId dst = topo_.find_node(ts.destination);
    f.destination = dst != topo::kNoNode ? topo_.node(dst).address
                                         : *wire::Address::parse(ts.destination);
    f.size_bits = ts.frame_bits;
    f.id = ev.msg_id;

    MsgInfo info;
    info.id = f.id;
    info.sender = ts.sender;
    info.destination = ts.destination;
    info.frame_bits = ts.frame_bits;
    info.injected_ms = now;
    info.unicast = topo::map_destination(f.destination) == topo::CastClass::Unicast;
    msgs_.emplace(f.id, info);
    ++nonterminal_msgs_;
    ++stats_.injected;

    record(now, name(snd), "Injected", f.id,
           "dest=" + ts.destination + ";bits=" + std::to_string(ts.frame_bits));
    if (node_down_[static_cast<std::size_t>(snd)]) {
        record(now, name(snd), "Lost", f.id, "sender_down");
        return;
    }
    endpoint_send(snd, f, now, true);
}

void Sim::on_arrival(const FrameArrival& ev, Millis now) {
    --pending_frames_;
    const Frame& f = ev.frame;

    // A link that failed while the frame was on it corrupts the frame.
    for (Millis s : link_fault_starts_[ev.link_idx]) {
        if (s > ev.departed && s <= now) {
            record(now, name(ev.to), "Lost", f.id,
                   "link_failed_in_transit;link=" + name(ev.from) + "|" + name(ev.to));
            return;
        }
    }

    NodeId to = ev.to;
    if (node_down_[static_cast<std::size_t>(to)]) {
        if (f.kind == MessageKind::Fdqm && sc_.protocol == ProtocolKind::Ftn) {
            pending_fdqm_[to].emplace_back(ev.from, f);  // answered at repair
        } else {
            record(now, name(to), "Lost", f.id, "node_down");
        }
        return;
    }

    const topo::Node& node = topo_.node(to);
    auto rs = routers_.find(to);
    if (rs != routers_.end()) {
        if (f.kind == MessageKind::Fdqm || f.kind == MessageKind::Fdrm) {
            auto actions = rs->second.handle_frame(f, ev.from, now);
            if (f.kind == MessageKind::Fdrm) {
                for (const auto& a : actions)
                    if (const auto* send = std::get_if<protocol::SendAction>(&a))
                        if (send->frame.kind != MessageKind::Data &&
                            send->frame.kind != MessageKind::Nack)
                            stats_.fdrm_reply_violation = true;
            }
            apply_actions(to, actions, now);
            return;
        }
        if (f.destination == node.address) {
            consume(to, f, now);
            return;
        }
        apply_actions(to, rs->second.handle_frame(f, ev.from, now), now);
        return;
    }

    if (node.kind == topo::NodeKind::Switch) {
        if (f.kind == MessageKind::Fdqm) {
            emit_fdrm_reply(to, ev.from, now);
            return;
        }
        if (f.kind == MessageKind::Fdrm) return;
        if (f.destination == node.address) {
            consume(to, f, now);
            return;
        }
        switch_forward(to, ev.from, f, now);
        return;
    }

    // Host.
    if (f.kind == MessageKind::Fdqm) {
        emit_fdrm_reply(to, ev.from, now);
        return;
    }
    if (f.kind == MessageKind::Fdrm) return;
    if (f.destination == node.address ||
        topo::map_destination(f.destination) != topo::CastClass::Unicast) {
        consume(to, f, now);
        return;
    }
    record(now, name(to), "Lost", f.id, "misdelivered");
}

RunResult Sim::run() {
    auto issues = validate(sc_);
    if (!issues.empty()) throw ValidationError(std::move(issues));

    node_down_.assign(topo_.nodes.size(), 0);
    link_down_.assign(topo_.links.size(), 0);
    link_fault_starts_.assign(topo_.links.size(), {});

    for (const auto& n : topo_.nodes)
        if (topo_.is_routing_device(n.id))
            routers_.emplace(n.id, RouterState(topo_, n.id, sc_.ftn, sc_.protocol));

    if (sc_.protocol == ProtocolKind::Ftn)
        for (const auto& [id, rs] : routers_) {
            (void)rs;
            schedule(0, kPrioDetectionTick, DetectionTick{id});
        }

    for (std::size_t i = 0; i < sc_.faults.size(); ++i) {
        if (sc_.faults[i].duration_ms == 0) continue;
        schedule(sc_.faults[i].start_ms, kPrioFault, FaultStart{i});
        schedule(sc_.faults[i].start_ms + sc_.faults[i].duration_ms, kPrioFault,
                 FaultEnd{i});
        pending_faults_ += 2;
    }

    std::uint64_t next_msg_id = 1;
    for (std::size_t si = 0; si < sc_.traffic.size(); ++si) {
        const auto& ts = sc_.traffic[si];
        for (std::int64_t k = 0; k < ts.count; ++k) {
            Millis at = ts.start_ms;
            if (k > 0)
                at += static_cast<Millis>(
                    std::llround(static_cast<double>(k) * 1000.0 / ts.frame_rate_fps));
            schedule(at, kPrioInject, Inject{si, k, next_msg_id++});
            ++pending_injections_;
        }
    }

    Millis now = 0;
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        if (ev.time > sc_.horizon_ms) {
            if (nonterminal_msgs_ > 0) {
                record(sc_.horizon_ms, "-", "Truncated", 0,
                       std::to_string(nonterminal_msgs_) + " message(s) in flight at horizon");
                stats_.truncated = true;
            }
            break;
        }
        now = ev.time;
        stats_.end_time_ms = now;

        if (const auto* a = std::get_if<FrameArrival>(&ev.payload)) {
            on_arrival(*a, now);
        } else if (const auto* dt = std::get_if<DetectionTick>(&ev.payload)) {
            if (!node_down_[static_cast<std::size_t>(dt->router)])
                apply_actions(dt->router,
                              routers_.at(dt->router).on_detection_tick(now), now);
            schedule(now + sc_.ftn.qm_period_ms, kPrioDetectionTick,
                     DetectionTick{dt->router});
        } else if (const auto* pt = std::get_if<ProbeTick>(&ev.payload)) {
            if (node_down_[static_cast<std::size_t>(pt->router)])
                schedule(now + sc_.ftn.qm_period_ms, kPrioProbeTick, *pt);
            else
                apply_actions(pt->router,
                              routers_.at(pt->router).on_probe_tick(pt->neighbor, now),
                              now);
        } else if (const auto* bd = std::get_if<BufferDeadline>(&ev.payload)) {
            if (node_down_[static_cast<std::size_t>(bd->router)])
                schedule(repair_time(name(bd->router), now), kPrioBufferDeadline, *bd);
            else
                apply_actions(bd->router,
                              routers_.at(bd->router).on_buffer_timeout(bd->entry_id, now),
                              now);
        } else if (const auto* rc = std::get_if<RetransmitCheck>(&ev.payload)) {
            if (node_down_[static_cast<std::size_t>(rc->node)]) {
                schedule(repair_time(name(rc->node), now), kPrioRetransmitCheck, *rc);
            } else {
                auto snd = senders_.find(rc->node);
                if (snd != senders_.end()) {
                    auto resend = snd->second.on_retransmit_check(rc->msg_id, now);
                    if (resend) {
                        record(now, name(rc->node), "Retransmitted", rc->msg_id,
                               "attempt=" +
                                   std::to_string(snd->second.retransmissions(rc->msg_id) + 2));
                        stats_.last_retransmit_ms = std::max(stats_.last_retransmit_ms, now);
                        endpoint_send(rc->node, *resend, now, true);
                    }
                }
            }
        } else if (const auto* fs = std::get_if<FaultStart>(&ev.payload)) {
            on_fault_start(fs->fault_idx, now);
        } else if (const auto* fe = std::get_if<FaultEnd>(&ev.payload)) {
            on_fault_end(fe->fault_idx, now);
        } else if (const auto* in = std::get_if<Inject>(&ev.payload)) {
            on_inject(*in, now);
        }

        if (quiescent()) break;
    }

    // Outcome bookkeeping.
    double latency_sum = 0;
    std::int64_t latency_count = 0;
    std::int64_t delivered_bits = 0;
    for (const auto& [id, m] : msgs_) {
        MessageOutcome o;
        o.id = id;
        o.sender = m.sender;
        o.destination = m.destination;
        o.injected_ms = m.injected_ms;
        o.delivered_ms = m.delivered_ms;
        o.nacks = m.nacks;
        auto snd = senders_.end();
        for (auto it = senders_.begin(); it != senders_.end(); ++it)
            if (it->second.first_sent(id)) snd = it;
        if (snd != senders_.end()) o.retransmissions = snd->second.retransmissions(id);
        if (m.delivered_ms >= 0) {
            o.terminal = "delivered";
            ++stats_.delivered;
            delivered_bits += m.frame_bits;
        } else if (m.nacks > 0) {
            o.terminal = "nacked";
            ++stats_.nacked;
        } else {
            o.terminal = "lost";
            ++stats_.lost;
        }
        if (m.acked_ms >= 0) {
            o.latency_ms = m.acked_ms - m.injected_ms;
            latency_sum += static_cast<double>(o.latency_ms);
            ++latency_count;
            stats_.max_latency_ms = std::max(stats_.max_latency_ms, o.latency_ms);
        }
        stats_.messages.push_back(std::move(o));
    }
    if (latency_count > 0) stats_.mean_latency_ms = latency_sum / static_cast<double>(latency_count);
    if (stats_.end_time_ms > 0)
        stats_.throughput_bps = static_cast<double>(delivered_bits) * 1000.0 /
                                static_cast<double>(stats_.end_time_ms);
    return RunResult{std::move(trace_), std::move(stats_)};
}

}  // namespace

RunResult run(const Scenario& sc) { return Sim(sc).run(); }

std::string trace_to_csv(std::span<const TraceRecord> trace) {
    std::ostringstream out;
    out << "time_ms,node,event,msg_id,detail\n";
    for (const auto& r : trace) {
        out << r.time_ms << ',' << r.node << ',' << r.event << ',';
        if (r.msg_id != 0) out << r.msg_id;
        out << ',' << r.detail << '\n';
    }
    return out.str();
}

}  // namespace ftn::engine
