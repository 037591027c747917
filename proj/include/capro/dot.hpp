#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <tuple>
#include <vector>

#include "capro/capillary.hpp"

namespace capro {

/// Graphviz rendering of a routing pattern: bottleneck links solid with their
/// layer annotation, residual links dashed, loads labeled with 5 decimals.
inline std::string export_dot(const RoutingPattern& pat) {
    std::vector<PatternLink> links = pat.links;
    std::sort(links.begin(), links.end(), [](const PatternLink& x, const PatternLink& y) {
        int xa = std::min(x.from, x.to), xb = std::max(x.from, x.to);
        int ya = std::min(y.from, y.to), yb = std::max(y.from, y.to);
        return std::tie(xa, xb, x.layer) < std::tie(ya, yb, y.layer);
    });
    std::string out = "graph capillary {\n";
    out += "  " + std::to_string(pat.source) + " [shape=doublecircle];\n";
    out += "  " + std::to_string(pat.sink) + " [shape=doublecircle];\n";
    char buf[128];
    for (const PatternLink& l : links) {
        if (l.layer > 0)
            std::snprintf(buf, sizeof buf, "  %d -- %d [label=\"%.5f\\nL%d\", style=solid];\n",
                          l.from, l.to, l.load, l.layer);
        else
            std::snprintf(buf, sizeof buf, "  %d -- %d [label=\"%.5f\", style=dashed];\n",
                          l.from, l.to, l.load);
        out += buf;
    }
    out += "}\n";
    return out;
}

} // namespace capro
