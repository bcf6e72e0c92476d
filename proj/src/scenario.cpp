#include "ftn/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ftn::scenario {

using nlohmann::json;

namespace {

class Issues {
public:
    void add(const std::string& path, const std::string& what) {
        items_.push_back(path + ": " + what);
    }
    bool empty() const { return items_.empty(); }
    std::vector<std::string> take() { return std::move(items_); }

    // Rejects keys outside the allowed set.
    void check_keys(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : obj.items()) {
            (void)value;
            bool ok = false;
            for (const char* a : allowed)
                if (key == a) ok = true;
            if (!ok) add(path + "." + key, "unknown key");
        }
    }

    std::optional<std::int64_t> get_int(const json& obj, const std::string& path,
                                        const char* key,
                                        std::optional<std::int64_t> fallback) {
        if (!obj.contains(key)) {
            if (!fallback) add(path + "." + key, "required");
            return fallback;
        }
        if (!obj[key].is_number_integer()) {
            add(path + "." + key, "must be an integer");
            return fallback;
        }
        return obj[key].get<std::int64_t>();
    }

    std::optional<double> get_num(const json& obj, const std::string& path,
                                  const char* key, std::optional<double> fallback) {
        if (!obj.contains(key)) {
            if (!fallback) add(path + "." + key, "required");
            return fallback;
        }
        if (!obj[key].is_number()) {
            add(path + "." + key, "must be a number");
            return fallback;
        }
        return obj[key].get<double>();
    }

    std::optional<std::string> get_str(const json& obj, const std::string& path,
                                       const char* key,
                                       std::optional<std::string> fallback) {
        if (!obj.contains(key)) {
            if (!fallback) add(path + "." + key, "required");
            return fallback;
        }
        if (!obj[key].is_string()) {
            add(path + "." + key, "must be a string");
            return fallback;
        }
        return obj[key].get<std::string>();
    }

private:
    std::vector<std::string> items_;
};

topo::Topology parse_topology(const json& doc, Issues& issues) {
    if (!doc.contains("topology")) {
        issues.add("topology", "required");
        return topo::build_paper_topology();
    }
    const json& t = doc["topology"];
    if (t.is_string()) {
        if (t.get<std::string>() != "paper")
            issues.add("topology", "unknown builtin '" + t.get<std::string>() + "'");
        return topo::build_paper_topology();
    }
    if (!t.is_object()) {
        issues.add("topology", "must be \"paper\" or an object");
        return topo::build_paper_topology();
    }
    if (t.contains("hosts_per_switch") && !t.contains("nodes")) {
        issues.check_keys(t, "topology", {"hosts_per_switch"});
        auto n = issues.get_int(t, "topology", "hosts_per_switch", 3);
        if (n && (*n < 0 || *n > 200)) {
            issues.add("topology.hosts_per_switch", "must be within 0..200");
            n = 3;
        }
        return topo::build_paper_topology(static_cast<int>(n.value_or(3)));
    }

    issues.check_keys(t, "topology", {"nodes", "links"});
    topo::Topology out;
    if (!t.contains("nodes") || !t["nodes"].is_array()) {
        issues.add("topology.nodes", "required array");
        return topo::build_paper_topology();
    }
    if (!t.contains("links") || !t["links"].is_array()) {
        issues.add("topology.links", "required array");
        return topo::build_paper_topology();
    }
    std::size_t i = 0;
    for (const auto& jn : t["nodes"]) {
        const std::string path = "topology.nodes[" + std::to_string(i++) + "]";
        if (!jn.is_object()) {
            issues.add(path, "must be an object");
            continue;
        }
        issues.check_keys(jn, path, {"name", "kind", "address"});
        auto name = issues.get_str(jn, path, "name", std::nullopt);
        auto kind = issues.get_str(jn, path, "kind", std::nullopt);
        auto addr = issues.get_str(jn, path, "address", std::nullopt);
        if (!name || !kind || !addr) continue;
        topo::NodeKind k;
        if (*kind == "group_server") k = topo::NodeKind::GroupServer;
        else if (*kind == "router") k = topo::NodeKind::Router;
        else if (*kind == "switch") k = topo::NodeKind::Switch;
        else if (*kind == "host") k = topo::NodeKind::Host;
        else {
            issues.add(path + ".kind", "one of group_server|router|switch|host");
            continue;
        }
        auto parsed = wire::Address::parse(*addr);
        if (!parsed) {
            issues.add(path + ".address", "not a dotted-decimal address");
            continue;
        }
        topo::NodeId id = static_cast<topo::NodeId>(out.nodes.size());
        out.nodes.push_back(topo::Node{id, *name, k, *parsed});
    }
    i = 0;
    for (const auto& jl : t["links"]) {
        const std::string path = "topology.links[" + std::to_string(i++) + "]";
        if (!jl.is_object()) {
            issues.add(path, "must be an object");
            continue;
        }
        issues.check_keys(jl, path, {"a", "b", "propagation_ms", "capacity_bps"});
        auto a = issues.get_str(jl, path, "a", std::nullopt);
        auto b = issues.get_str(jl, path, "b", std::nullopt);
        auto pd = issues.get_int(jl, path, "propagation_ms", 50);
        auto cap = issues.get_int(jl, path, "capacity_bps", 1'000'000);
        if (!a || !b) continue;
        topo::NodeId na = out.find_node(*a);
        topo::NodeId nb = out.find_node(*b);
        if (na == topo::kNoNode || nb == topo::kNoNode) {
            issues.add(path, "unknown endpoint " + (na == topo::kNoNode ? *a : *b));
            continue;
        }
        if (*pd <= 0) issues.add(path + ".propagation_ms", "must be > 0");
        if (*cap <= 0) issues.add(path + ".capacity_bps", "must be > 0");
        out.links.push_back(topo::Link{na, nb, *pd, *cap, true});
    }
    if (out.nodes.empty()) {
        issues.add("topology.nodes", "at least one node required");
        return topo::build_paper_topology();
    }
    try {
        topo::derive_routing_tables(out);
    } catch (const std::invalid_argument& e) {
        issues.add("topology", e.what());
        return topo::build_paper_topology();
    }
    return out;
}

}  // namespace

Loaded parse(const std::string& json_text) {
    Issues issues;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw engine::ValidationError({std::string("document: ") + e.what()});
    }
    if (!doc.is_object()) throw engine::ValidationError({"document: must be an object"});

    issues.check_keys(doc, "document",
                      {"topology", "protocol", "params", "traffic", "faults", "output"});

    Loaded out;
    out.scenario.topology = parse_topology(doc, issues);

    auto proto = issues.get_str(doc, "document", "protocol", std::nullopt);
    if (proto) {
        if (*proto == "ftn") out.scenario.protocol = protocol::ProtocolKind::Ftn;
        else if (*proto == "conventional")
            out.scenario.protocol = protocol::ProtocolKind::Conventional;
        else
            issues.add("protocol", "one of ftn|conventional");
    }

    if (doc.contains("params")) {
        const json& p = doc["params"];
        if (!p.is_object()) {
            issues.add("params", "must be an object");
        } else {
            issues.check_keys(p, "params",
                              {"qm_period_ms", "buffer_timeout_ms", "buffer_capacity_bits",
                               "retransmit_timeout_ms", "ack_enabled", "horizon_ms"});
            out.scenario.ftn.qm_period_ms =
                issues.get_int(p, "params", "qm_period_ms", 500).value_or(500);
            out.scenario.ftn.buffer_timeout_ms =
                issues.get_int(p, "params", "buffer_timeout_ms", 1000).value_or(1000);
            out.scenario.ftn.buffer_capacity_bits =
                issues.get_int(p, "params", "buffer_capacity_bits", 1'000'000)
                    .value_or(1'000'000);
            out.scenario.sender.retransmit_timeout_ms =
                issues.get_int(p, "params", "retransmit_timeout_ms", 1200).value_or(1200);
            out.scenario.horizon_ms =
                issues.get_int(p, "params", "horizon_ms", 120'000).value_or(120'000);
            if (p.contains("ack_enabled")) {
                if (!p["ack_enabled"].is_boolean())
                    issues.add("params.ack_enabled", "must be a boolean");
                else
                    out.scenario.ack_enabled = p["ack_enabled"].get<bool>();
            }
        }
    }

    if (!doc.contains("traffic") || !doc["traffic"].is_array() || doc["traffic"].empty()) {
        issues.add("traffic", "required non-empty array");
    } else {
        std::size_t i = 0;
        for (const auto& jt : doc["traffic"]) {
            const std::string path = "traffic[" + std::to_string(i++) + "]";
            if (!jt.is_object()) {
                issues.add(path, "must be an object");
                continue;
            }
            issues.check_keys(jt, path,
                              {"sender", "destination", "frame_bits", "frame_rate_fps",
                               "start_ms", "count"});
            engine::TrafficSpec ts;
            ts.sender = issues.get_str(jt, path, "sender", std::nullopt).value_or("");
            ts.destination =
                issues.get_str(jt, path, "destination", std::nullopt).value_or("");
            ts.frame_bits = issues.get_int(jt, path, "frame_bits", 500).value_or(500);
            ts.frame_rate_fps =
                issues.get_num(jt, path, "frame_rate_fps", 0.0).value_or(0.0);
            ts.start_ms = issues.get_int(jt, path, "start_ms", 0).value_or(0);
            ts.count = issues.get_int(jt, path, "count", 1).value_or(1);
            out.scenario.traffic.push_back(std::move(ts));
        }
    }

    if (doc.contains("faults")) {
        if (!doc["faults"].is_array()) {
            issues.add("faults", "must be an array");
        } else {
            std::size_t i = 0;
            for (const auto& jf : doc["faults"]) {
                const std::string path = "faults[" + std::to_string(i++) + "]";
                if (!jf.is_object()) {
                    issues.add(path, "must be an object");
                    continue;
                }
                issues.check_keys(jf, path, {"node", "link", "start_ms", "duration_ms"});
                engine::FaultSpec fs;
                if (jf.contains("node") == jf.contains("link")) {
                    issues.add(path, "exactly one of node|link required");
                    continue;
                }
                if (jf.contains("node")) {
                    fs.kind = engine::FaultSpec::Kind::Node;
                    fs.node = issues.get_str(jf, path, "node", std::nullopt).value_or("");
                } else {
                    fs.kind = engine::FaultSpec::Kind::Link;
                    if (!jf["link"].is_array() || jf["link"].size() != 2 ||
                        !jf["link"][0].is_string() || !jf["link"][1].is_string()) {
                        issues.add(path + ".link", "must be [\"A\",\"B\"]");
                        continue;
                    }
                    fs.link_a = jf["link"][0].get<std::string>();
                    fs.link_b = jf["link"][1].get<std::string>();
                }
                fs.start_ms = issues.get_int(jf, path, "start_ms", 0).value_or(0);
                fs.duration_ms =
                    issues.get_int(jf, path, "duration_ms", std::nullopt).value_or(0);
                out.scenario.faults.push_back(std::move(fs));
            }
        }
    }

    if (doc.contains("output")) {
        const json& o = doc["output"];
        if (!o.is_object()) {
            issues.add("output", "must be an object");
        } else {
            issues.check_keys(o, "output", {"trace_csv"});
            out.trace_path = issues.get_str(o, "output", "trace_csv", std::nullopt);
        }
    }

    // Semantic validation on top of the structural pass; both lists are
    // reported together.
    for (const auto& problem : engine::validate(out.scenario))
        issues.add("scenario", problem);

    if (!issues.empty()) throw engine::ValidationError(issues.take());
    return out;
}

Loaded load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string summary_text(const engine::RunResult& result) {
    const auto& s = result.stats;
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line,
                  "messages: %lld injected, %lld delivered, %lld nacked, %lld lost\n",
                  static_cast<long long>(s.injected), static_cast<long long>(s.delivered),
                  static_cast<long long>(s.nacked), static_cast<long long>(s.lost));
    out << line;
    std::snprintf(line, sizeof line,
                  "latency_ms: mean %.3f, max %lld\nthroughput_bps: %.3f\n",
                  s.mean_latency_ms, static_cast<long long>(s.max_latency_ms),
                  s.throughput_bps);
    out << line;
    if (s.truncated) out << "warning: run truncated at horizon\n";
    for (const auto& m : s.messages) {
        out << "msg " << m.id << ": " << m.sender << " -> " << m.destination
            << " injected_ms=" << m.injected_ms << " terminal=" << m.terminal;
        if (m.latency_ms >= 0) out << " latency_ms=" << m.latency_ms;
        if (m.retransmissions > 0) out << " retransmissions=" << m.retransmissions;
        if (m.nacks > 0) out << " nacks=" << m.nacks;
        out << '\n';
    }
    return out.str();
}

}  // namespace ftn::scenario
