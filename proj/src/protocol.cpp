#include "ftn/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace ftn::protocol {

using topo::ConnectionStatus;
using topo::ConnectionType;
using topo::NextHop;
using wire::MessageKind;

RouterState::RouterState(const topo::Topology& t, topo::NodeId self,
                         FtnParams params, ProtocolKind protocol)
    : topo_(&t),
      self_(self),
      params_(params),
      protocol_(protocol),
      table_(t.tables[static_cast<std::size_t>(self)]),
      remaining_bits_(params.buffer_capacity_bits) {
    if (table_.entries.empty())
        throw std::invalid_argument("node has no routing table: " + t.node(self).name);
}

bool RouterState::probing(topo::NodeId neighbor) const {
    auto it = watch_.find(neighbor);
    return it != watch_.end() && it->second.probing;
}

void RouterState::check_capacity_invariant() const {
    std::int64_t used = 0;
    for (const auto& e : buffer_) used += e.frame.size_bits;
    if (remaining_bits_ < 0 || used + remaining_bits_ != params_.buffer_capacity_bits)
        throw std::logic_error("buffer capacity invariant violated");
}

std::vector<Action> RouterState::on_detection_tick(Millis now) {
    std::vector<Action> out;
    if (protocol_ != ProtocolKind::Ftn) return out;

    for (const auto* entry : table_.direct_entries()) {
        topo::NodeId nbr = entry->via;
        auto& w = watch_[nbr];
        if (entry->status == ConnectionStatus::Inactive) continue;  // probe loop owns it

        if (w.awaiting_reply_since &&
            *w.awaiting_reply_since + params_.qm_period_ms <= now) {
            // Silent for a full period: declare the neighbor faulty.
            topo::set_status(table_, nbr, ConnectionStatus::Inactive);
            w.awaiting_reply_since.reset();
            out.push_back(MarkInactiveAction{nbr});
            continue;
        }
        Frame qm;
        qm.kind = MessageKind::Fdqm;
        qm.sender = topo_->node(self_).address;
        qm.destination = topo_->node(nbr).address;
        out.push_back(SendAction{qm, entry->interface, nbr});
        if (!w.awaiting_reply_since) w.awaiting_reply_since = now;
    }
    return out;
}

void RouterState::neighbor_alive(topo::NodeId neighbor, Millis now,
                                 std::vector<Action>& out) {
    auto& w = watch_[neighbor];
    w.awaiting_reply_since.reset();

    const topo::RouteEntry* direct = nullptr;
    for (const auto& e : table_.entries)
        if (e.type == ConnectionType::Direct && e.via == neighbor) direct = &e;
    if (!direct) return;  // not one of ours (cannot happen on tree links)

    if (direct->status == ConnectionStatus::Active) return;

    topo::set_status(table_, neighbor, ConnectionStatus::Active);
    w.probing = false;
    out.push_back(MarkActiveAction{neighbor});

    // Fault recovery step 3: flush buffered messages toward the recovered
    // hop in stored order.
    std::vector<BufferEntry> released;
    auto it = buffer_.begin();
    while (it != buffer_.end()) {
        if (it->faulty_next_hop == neighbor) {
            released.push_back(*it);
            remaining_bits_ += it->frame.size_bits;
            it = buffer_.erase(it);
        } else {
            ++it;
        }
    }
    if (!released.empty()) {
        ReleaseAction rel;
        rel.neighbor = neighbor;
        for (const auto& e : released) rel.msg_ids.push_back(e.frame.id);
        out.push_back(std::move(rel));
        for (const auto& e : released) {
            auto sent = forward(e.frame, 0, now);
            out.insert(out.end(), sent.begin(), sent.end());
        }
    }
    check_capacity_invariant();
}

std::vector<Action> RouterState::handle_frame(const Frame& f, topo::NodeId from,
                                              Millis now) {
    std::vector<Action> out;
    int arrival_interface = 0;
    for (const auto& e : table_.entries)
        if (e.type == ConnectionType::Direct && e.via == from)
            arrival_interface = e.interface;

    switch (f.kind) {
        case MessageKind::Fdqm: {
            if (protocol_ != ProtocolKind::Ftn) break;  // no FDM machinery
            Frame rm;
            rm.kind = MessageKind::Fdrm;
            rm.sender = topo_->node(self_).address;
            rm.destination = f.sender;
            out.push_back(SendAction{rm, arrival_interface, from});
            neighbor_alive(from, now, out);
            break;
        }
        case MessageKind::Fdrm: {
            if (protocol_ != ProtocolKind::Ftn) break;
            // A report never triggers a reply; it only refreshes liveness.
            neighbor_alive(from, now, out);
            break;
        }
        case MessageKind::Nack:
        case MessageKind::Data: {
            auto fwd = forward(f, arrival_interface, now);
            out.insert(out.end(), fwd.begin(), fwd.end());
            break;
        }
    }
    return out;
}

std::vector<Action> RouterState::originate(const Frame& f, Millis now) {
    return forward(f, 0, now);
}

std::vector<Action> RouterState::forward(const Frame& f, int arrival_interface,
                                         Millis now) {
    std::vector<Action> out;
    topo::CastClass cast = topo::map_destination(f.destination);

    if (cast != topo::CastClass::Unicast) {
        for (const auto& [iface, nbr] :
             topo::find_interfaces(table_, f.destination, cast, arrival_interface))
            out.push_back(SendAction{f, iface, nbr});
        return out;
    }

    NextHop nh = topo::next_hop(table_, f.destination);
    switch (nh.state) {
        case NextHop::State::Ok:
            out.push_back(SendAction{f, nh.interface, nh.neighbor});
            break;
        case NextHop::State::NoRoute:
            out.push_back(DropAction{f.id, DropAction::Reason::NoRoute});
            break;
        case NextHop::State::Inactive:
            if (protocol_ == ProtocolKind::Ftn) {
                auto stored = store_on_fault(f, nh.neighbor, now);
                out.insert(out.end(), stored.begin(), stored.end());
            } else {
                // Conventional approach: intermediate devices drop and the
                // source retransmits after its timeout.
                out.push_back(DropAction{f.id, DropAction::Reason::InactiveRoute});
            }
            break;
    }
    return out;
}

std::vector<Action> RouterState::store_on_fault(const Frame& f, topo::NodeId faulty,
                                                Millis now) {
    std::vector<Action> out;
    if (f.size_bits > remaining_bits_) {
        // No room: notify the source immediately so it can retransmit.
        send_nack_for(f, now, out);
        return out;
    }
    BufferEntry e;
    e.entry_id = next_entry_id_++;
    e.frame = f;
    e.stored_at = now;
    e.deadline = now + params_.buffer_timeout_ms;
    e.faulty_next_hop = faulty;
    remaining_bits_ -= f.size_bits;
    buffer_.push_back(e);
    out.push_back(StoreAction{e.entry_id, f.id, faulty, e.deadline});

    auto& w = watch_[faulty];
    if (!w.probing) {
        w.probing = true;
        out.push_back(ScheduleProbeAction{faulty, now});  // loop starts at k = 0
    }
    check_capacity_invariant();
    return out;
}

std::vector<Action> RouterState::on_probe_tick(topo::NodeId neighbor, Millis now) {
    std::vector<Action> out;
    auto& w = watch_[neighbor];
    if (!w.probing) return out;

    const topo::RouteEntry* direct = nullptr;
    for (const auto& e : table_.entries)
        if (e.type == ConnectionType::Direct && e.via == neighbor) direct = &e;
    if (!direct || direct->status == ConnectionStatus::Active) {
        w.probing = false;
        return out;
    }
    Frame qm;
    qm.kind = MessageKind::Fdqm;
    qm.sender = topo_->node(self_).address;
    qm.destination = topo_->node(neighbor).address;
    out.push_back(SendAction{qm, direct->interface, neighbor});
    out.push_back(ScheduleProbeAction{neighbor, now + params_.qm_period_ms});
    return out;
}

std::vector<Action> RouterState::on_buffer_timeout(std::uint64_t entry_id, Millis now) {
    std::vector<Action> out;
    auto it = std::find_if(buffer_.begin(), buffer_.end(),
                           [&](const BufferEntry& e) { return e.entry_id == entry_id; });
    if (it == buffer_.end()) return out;  // released earlier; stale timer
    if (now < it->deadline) return out;

    BufferEntry entry = *it;
    buffer_.erase(it);
    remaining_bits_ += entry.frame.size_bits;  // B = B + M
    out.push_back(TimeoutAction{entry.entry_id, entry.frame.id});
    send_nack_for(entry.frame, now, out);
    // The probe schedule stays: detection of the recovery continues.
    check_capacity_invariant();
    return out;
}

void RouterState::send_nack_for(const Frame& original, Millis now,
                                std::vector<Action>& out) {
    out.push_back(NackOriginated{original.id, original.sender});
    if (original.sender == topo_->node(self_).address)
        return;  // buffering device is the source itself; engine notifies it locally
    Frame nack;
    nack.kind = MessageKind::Nack;
    nack.sender = topo_->node(self_).address;
    nack.destination = original.sender;
    nack.id = original.id;
    auto routed = forward(nack, 0, now);
    out.insert(out.end(), routed.begin(), routed.end());
}

std::vector<std::uint64_t> RouterState::expired_entries(Millis now) const {
    std::vector<std::uint64_t> out;
    for (const auto& e : buffer_)
        if (e.deadline <= now) out.push_back(e.entry_id);
    return out;
}

bool RouterState::force_status(topo::NodeId neighbor, topo::ConnectionStatus s) {
    const topo::RouteEntry* direct = nullptr;
    for (const auto& e : table_.entries)
        if (e.type == ConnectionType::Direct && e.via == neighbor) direct = &e;
    if (!direct || direct->status == s) return false;
    topo::set_status(table_, neighbor, s);
    watch_[neighbor].awaiting_reply_since.reset();
    return true;
}

void RouterState::reset_detection() {
    for (auto& [nbr, w] : watch_) {
        (void)nbr;
        w.awaiting_reply_since.reset();
    }
}

void SenderState::on_send(const Frame& f, Millis now) {
    auto it = msgs_.find(f.id);
    if (it == msgs_.end()) {
        Outstanding o;
        o.frame = f;
        o.first_sent = now;
        o.last_sent = now;
        msgs_.emplace(f.id, std::move(o));
    } else {
        it->second.last_sent = now;
        it->second.retransmissions += 1;
        it->second.last_nack_from.reset();
    }
}

void SenderState::on_ack(std::uint64_t id, Millis now) {
    auto it = msgs_.find(id);
    if (it == msgs_.end() || it->second.acked_at) return;
    it->second.acked_at = now;
}

bool SenderState::acked(std::uint64_t id) const {
    auto it = msgs_.find(id);
    return it != msgs_.end() && it->second.acked_at.has_value();
}

std::optional<Frame> SenderState::on_nack(std::uint64_t id,
                                          const wire::Address& reporter, Millis now) {
    (void)now;
    auto it = msgs_.find(id);
    if (it == msgs_.end()) return std::nullopt;  // uncorrelated
    Outstanding& o = it->second;
    if (o.acked_at) return std::nullopt;
    if (o.last_nack_from && *o.last_nack_from == reporter)
        return std::nullopt;  // duplicate of an already-honored NACK
    o.last_nack_from = reporter;
    return o.frame;
}

std::optional<Frame> SenderState::on_retransmit_check(std::uint64_t id, Millis now) {
    auto it = msgs_.find(id);
    if (it == msgs_.end()) return std::nullopt;
    Outstanding& o = it->second;
    if (o.acked_at) return std::nullopt;
    if (now < o.last_sent + params_.retransmit_timeout_ms) return std::nullopt;
    return o.frame;
}

std::optional<Millis> SenderState::first_sent(std::uint64_t id) const {
    auto it = msgs_.find(id);
    if (it == msgs_.end()) return std::nullopt;
    return it->second.first_sent;
}

std::optional<Millis> SenderState::ack_time(std::uint64_t id) const {
    auto it = msgs_.find(id);
    if (it == msgs_.end()) return std::nullopt;
    return it->second.acked_at;
}

int SenderState::retransmissions(std::uint64_t id) const {
    auto it = msgs_.find(id);
    return it == msgs_.end() ? 0 : it->second.retransmissions;
}

}  // namespace ftn::protocol
