#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capro/errors.hpp"

namespace capro {

/// Undirected link between two node ids, stored with the smaller id first.
struct Link {
    int a = 0;
    int b = 0;

    Link() = default;
    Link(int i, int j) : a(std::min(i, j)), b(std::max(i, j)) {}

    auto operator<=>(const Link&) const = default;
};

struct EndpointPair {
    int source = 0;
    int sink = 0;
};

/// Undirected graph with dense node ids 0..node_count-1, unit-capacity links
/// and optional 2D node positions.  Immutable after construction.
class Network {
public:
    Network(int node_count, std::vector<Link> links,
            std::optional<std::vector<std::array<double, 2>>> positions = std::nullopt)
        : node_count_(node_count), links_(std::move(links)), positions_(std::move(positions)) {
        validate();
        std::sort(links_.begin(), links_.end());
    }

    int node_count() const { return node_count_; }
    const std::vector<Link>& links() const { return links_; }
    const std::optional<std::vector<std::array<double, 2>>>& positions() const {
        return positions_;
    }

    bool operator==(const Network& other) const {
        return node_count_ == other.node_count_ && links_ == other.links_ &&
               positions_ == other.positions_;
    }

private:
    void validate() const {
        if (node_count_ <= 0)
            throw ValidationError("network must have a positive node count");
        std::vector<Link> seen;
        for (const Link& l : links_) {
            if (l.a == l.b)
                throw ValidationError("self-loop link [" + std::to_string(l.a) + "," +
                                      std::to_string(l.b) + "]");
            if (l.a < 0 || l.b >= node_count_)
                throw ValidationError("link [" + std::to_string(l.a) + "," +
                                      std::to_string(l.b) + "] references a node id outside 0.." +
                                      std::to_string(node_count_ - 1));
        }
        std::vector<Link> sorted = links_;
        std::sort(sorted.begin(), sorted.end());
        auto dup = std::adjacent_find(sorted.begin(), sorted.end());
        if (dup != sorted.end())
            throw ValidationError("duplicate link [" + std::to_string(dup->a) + "," +
                                  std::to_string(dup->b) + "]");
        if (positions_ && static_cast<int>(positions_->size()) != node_count_)
            throw ValidationError("positions count " + std::to_string(positions_->size()) +
                                  " does not match node count " + std::to_string(node_count_));
    }

    int node_count_;
    std::vector<Link> links_;
    std::optional<std::vector<std::array<double, 2>>> positions_;
};

inline std::vector<std::vector<int>> adjacency(const Network& net) {
    std::vector<std::vector<int>> adj(net.node_count());
    for (const Link& l : net.links()) {
        adj[l.a].push_back(l.b);
        adj[l.b].push_back(l.a);
    }
    return adj;
}

inline bool connected(const Network& net, int s, int t) {
    if (s == t) return true;
    auto adj = adjacency(net);
    std::vector<char> seen(net.node_count(), 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (v == t) return true;
            if (!seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
        }
    }
    return false;
}

/// Parses the network JSON document: {"nodes": n, "links": [[i,j],...],
/// "positions": [[x,y],...]?} with no other fields allowed.
inline Network load_network(std::string_view document) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(document);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("network parse failure: ") + e.what());
    }
    if (!j.is_object())
        throw ValidationError("network document must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "nodes" && it.key() != "links" && it.key() != "positions")
            throw ValidationError("unknown field \"" + it.key() + "\" in network document");
    }
    if (!j.contains("nodes") || !j["nodes"].is_number_integer())
        throw ValidationError("network document requires an integer \"nodes\" field");
    if (!j.contains("links") || !j["links"].is_array())
        throw ValidationError("network document requires an array \"links\" field");

    int nodes = j["nodes"].get<int>();
    std::vector<Link> links;
    for (const auto& e : j["links"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer())
            throw ValidationError("each link must be a 2-element integer array, got " + e.dump());
        links.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    std::optional<std::vector<std::array<double, 2>>> positions;
    if (j.contains("positions")) {
        if (!j["positions"].is_array())
            throw ValidationError("\"positions\" must be an array");
        std::vector<std::array<double, 2>> pos;
        for (const auto& e : j["positions"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ValidationError("each position must be a 2-element number array, got " +
                                      e.dump());
            pos.push_back({e[0].get<double>(), e[1].get<double>()});
        }
        positions = std::move(pos);
    }
    return Network(nodes, std::move(links), std::move(positions));
}

/// Canonical serialization: links sorted with the smaller id first.
/// load(save(n)) == n and save is a fixed point under the round trip.
inline std::string save_network(const Network& net) {
    nlohmann::ordered_json j;
    j["nodes"] = net.node_count();
    auto links = nlohmann::ordered_json::array();
    for (const Link& l : net.links()) links.push_back({l.a, l.b});
    j["links"] = std::move(links);
    if (net.positions()) {
        auto pos = nlohmann::ordered_json::array();
        for (const auto& p : *net.positions()) pos.push_back({p[0], p[1]});
        j["positions"] = std::move(pos);
    }
    return j.dump();
}

} // namespace capro
