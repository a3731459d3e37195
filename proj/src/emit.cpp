#include "qnet/emit.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "qnet/errors.hpp"

namespace qnet {

namespace {

using Json = nlohmann::json;

void require_valid(const CausalTrace& trace) {
    ValidationReport report = trace.validate();
    if (!report.ok()) {
        std::string detail = report.findings.front().code;
        throw SemanticError("InvalidTrace: " + detail + ": " + report.findings.front().detail);
    }
}

const std::string& marker_for(const Event& e, const DiagramStyle& style) {
    if (e.noisy) return style.marker_noisy;
    switch (e.kind) {
        case EventKind::Local:
            return e.op_class == OpClass::TypeII ? style.marker_local_type2
                                                 : style.marker_local_type1;
        case EventKind::Send:
        case EventKind::Receive: return style.marker_message;
        case EventKind::ResourceCreate: return style.marker_create;
        case EventKind::ResourceConsume: return style.marker_consume;
    }
    return style.marker_local_type1;
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string trim_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::set<std::pair<EventId, EventId>> edges_for(const CausalTrace& trace, RenderMode mode) {
    if (mode == RenderMode::Hasse) return trace.hasse_reduce();
    return trace.edges();
}

}  // namespace

RenderMode render_mode_from_string(const std::string& s) {
    if (s == "full") return RenderMode::Full;
    if (s == "hasse") return RenderMode::Hasse;
    throw ParseError("unknown render mode: " + s);
}

std::string to_dot(const CausalTrace& trace, const DiagramStyle& style, RenderMode mode) {
    require_valid(trace);
    std::ostringstream os;
    os << "digraph causal_trace {\n";
    os << "  rankdir=LR;\n";
    os << "  node [fontsize=10];\n";
    for (NodeId node : trace.lane_nodes()) {
        os << "  subgraph lane_" << node << " {\n";
        os << "    rank=same;\n";
        for (EventId id : trace.lane(node)) {
            const Event& e = trace.event(id);
            std::string label = e.unit_label.empty() ? event_kind_name(e.kind) : e.unit_label;
            os << "    e" << id << " [shape=" << marker_for(e, style) << " label=\""
               << dot_escape(label) << "\"];\n";
        }
        os << "  }\n";
    }
    for (const auto& [from, to] : edges_for(trace, mode)) {
        const Event& a = trace.event(from);
        const Event& b = trace.event(to);
        const bool message = a.kind == EventKind::Send && b.kind == EventKind::Receive &&
                             a.node != b.node;
        os << "  e" << from << " -> e" << to;
        if (message) {
            const bool classical = a.channel == ChannelKind::Classical;
            double width = style.penwidth;
            if (a.post_consumption) width *= style.post_consumption_factor;
            os << " [style=" << (classical ? style.classical_stroke : style.quantum_stroke)
               << " penwidth=" << trim_number(width) << " label=\"" << a.units << "\"";
            if (a.noisy || b.noisy) os << " color=\"black:invis:black\"";
            os << "]";
        } else {
            os << " [style=solid penwidth=" << trim_number(style.penwidth) << "]";
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

namespace {

struct SvgPoint {
    int x = 0, y = 0;
};

// Deterministic event coordinates: lanes stacked by node id, time along x by
// wall step, same-step events on a lane fanned out slightly.
std::map<EventId, SvgPoint> svg_layout(const CausalTrace& trace, const DiagramStyle& style,
                                       std::map<NodeId, int>& lane_row) {
    int row = 0;
    for (NodeId node : trace.lane_nodes()) lane_row[node] = row++;
    std::map<EventId, SvgPoint> pos;
    std::map<std::pair<NodeId, int>, int> crowd;
    for (const Event& e : trace.events()) {
        int k = crowd[{e.node, e.wall_step}]++;
        pos[e.id] = {style.margin + e.wall_step * style.pitch_x + k * (style.pitch_x / 4),
                     style.margin + lane_row[e.node] * style.pitch_y};
    }
    return pos;
}

void svg_marker(std::ostringstream& os, const Event& e, const SvgPoint& p) {
    if (e.noisy) {
        os << "  <path d=\"M" << p.x - 5 << " " << p.y - 5 << " L" << p.x + 5 << " " << p.y + 5
           << " M" << p.x - 5 << " " << p.y + 5 << " L" << p.x + 5 << " " << p.y - 5
           << "\" stroke=\"black\" stroke-width=\"1.5\" fill=\"none\"/>\n";
        return;
    }
    switch (e.kind) {
        case EventKind::Local:
            if (e.op_class == OpClass::TypeII) {
                os << "  <circle cx=\"" << p.x << "\" cy=\"" << p.y
                   << "\" r=\"7\" fill=\"none\" stroke=\"black\"/>\n";
                os << "  <circle cx=\"" << p.x << "\" cy=\"" << p.y
                   << "\" r=\"2.5\" fill=\"black\"/>\n";
            } else {
                os << "  <circle cx=\"" << p.x << "\" cy=\"" << p.y
                   << "\" r=\"4\" fill=\"black\"/>\n";
            }
            break;
        case EventKind::Send:
        case EventKind::Receive:
            os << "  <circle cx=\"" << p.x << "\" cy=\"" << p.y
               << "\" r=\"2.5\" fill=\"black\"/>\n";
            break;
        case EventKind::ResourceCreate:
            os << "  <path d=\"M" << p.x << " " << p.y - 5 << " L" << p.x - 5 << " " << p.y + 4
               << " L" << p.x + 5 << " " << p.y + 4 << " Z\" fill=\"black\"/>\n";
            break;
        case EventKind::ResourceConsume:
            os << "  <path d=\"M" << p.x << " " << p.y + 5 << " L" << p.x - 5 << " " << p.y - 4
               << " L" << p.x + 5 << " " << p.y - 4 << " Z\" fill=\"none\" stroke=\"black\"/>\n";
            break;
    }
}

}  // namespace

std::string to_svg(const CausalTrace& trace, const DiagramStyle& style, RenderMode mode) {
    require_valid(trace);
    std::map<NodeId, int> lane_row;
    std::map<EventId, SvgPoint> pos = svg_layout(trace, style, lane_row);
    int max_x = style.margin, max_y = style.margin;
    for (const auto& [id, p] : pos) {
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    const int width = max_x + style.margin;
    const int height = max_y + style.margin;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "  <style>text{font-family:monospace;font-size:10px;}</style>\n";

    // lanes
    for (NodeId node : trace.lane_nodes()) {
        const int y = style.margin + lane_row[node] * style.pitch_y;
        os << "  <line x1=\"" << style.margin / 2 << "\" y1=\"" << y << "\" x2=\""
           << width - style.margin / 2 << "\" y2=\"" << y
           << "\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
        os << "  <text x=\"4\" y=\"" << y + 3 << "\">n" << node << "</text>\n";
    }

    // causal edges: message arrows slanted, lane edges along the lane,
    // resource spans curved with a terminating dot at each party
    for (const auto& [from, to] : edges_for(trace, mode)) {
        const Event& a = trace.event(from);
        const Event& b = trace.event(to);
        const SvgPoint pa = pos[from];
        const SvgPoint pb = pos[to];
        const bool message = a.kind == EventKind::Send && b.kind == EventKind::Receive &&
                             a.node != b.node;
        if (message) {
            const bool classical = a.channel == ChannelKind::Classical;
            double width_px = 1.0;
            if (a.post_consumption) width_px *= style.post_consumption_factor;
            os << "  <line x1=\"" << pa.x << "\" y1=\"" << pa.y << "\" x2=\"" << pb.x
               << "\" y2=\"" << pb.y << "\" stroke=\"black\" stroke-width=\"" << width_px << "\"";
            if (classical) os << " stroke-dasharray=\"5 3\"";
            os << "/>\n";
            if (a.noisy || b.noisy)
                os << "  <line x1=\"" << pa.x << "\" y1=\"" << pa.y + 3 << "\" x2=\"" << pb.x
                   << "\" y2=\"" << pb.y + 3
                   << "\" stroke=\"black\" stroke-width=\"1\""
                   << (classical ? " stroke-dasharray=\"5 3\"" : "") << "/>\n";
        } else if (a.node != b.node) {
            // cross-lane non-message ordering (resource spans)
            const int midx = (pa.x + pb.x) / 2;
            const int midy = (pa.y + pb.y) / 2 - style.pitch_y / 3;
            os << "  <path d=\"M" << pa.x << " " << pa.y << " Q" << midx << " " << midy << " "
               << pb.x << " " << pb.y << "\" fill=\"none\" stroke=\"#555\""
               << " stroke-width=\"0.8\"/>\n";
            os << "  <circle cx=\"" << pa.x << "\" cy=\"" << pa.y
               << "\" r=\"2\" fill=\"#555\"/>\n";
            os << "  <circle cx=\"" << pb.x << "\" cy=\"" << pb.y
               << "\" r=\"2\" fill=\"#555\"/>\n";
        } else {
            os << "  <line x1=\"" << pa.x << "\" y1=\"" << pa.y << "\" x2=\"" << pb.x
               << "\" y2=\"" << pb.y << "\" stroke=\"#bbb\" stroke-width=\"0.7\"/>\n";
        }
    }

    // multiparty resource brackets: creation events of one unit at one step
    std::map<std::pair<int, std::string>, std::vector<EventId>> creations;
    for (const Event& e : trace.events())
        if (e.kind == EventKind::ResourceCreate)
            creations[{e.wall_step, e.unit_label}].push_back(e.id);
    for (const auto& [key, ids] : creations) {
        if (ids.size() < 3) continue;  // two-party spans ride the causal curve above
        int x = 0, ylo = 1 << 30, yhi = 0;
        for (EventId id : ids) {
            x = std::max(x, pos[id].x);
            ylo = std::min(ylo, pos[id].y);
            yhi = std::max(yhi, pos[id].y);
        }
        os << "  <path d=\"M" << x + 10 << " " << ylo << " Q" << x + 22 << " " << (ylo + yhi) / 2
           << " " << x + 10 << " " << yhi << "\" fill=\"none\" stroke=\"#555\"/>\n";
        for (EventId id : ids)
            os << "  <circle cx=\"" << pos[id].x << "\" cy=\"" << pos[id].y
               << "\" r=\"2\" fill=\"#555\"/>\n";
    }

    // markers last so they sit on top of edges
    for (const Event& e : trace.events()) svg_marker(os, e, pos[e.id]);

    os << "</svg>\n";
    return os.str();
}

std::string to_jsonl(const CausalTrace& trace) {
    std::ostringstream os;
    for (const Event& e : trace.events()) {
        Json j;
        j["id"] = e.id;
        j["node"] = e.node;
        j["kind"] = event_kind_name(e.kind);
        j["channel"] = channel_kind_name(e.channel);
        j["post_consumption"] = e.post_consumption;
        j["op_class"] = e.op_class == OpClass::TypeII ? "type2" : "type1";
        j["noisy"] = e.noisy;
        j["units"] = e.units;
        j["unit_label"] = e.unit_label;
        j["wall_step"] = e.wall_step;
        j["causes"] = e.causes;
        os << j.dump() << "\n";
    }
    return os.str();
}

CausalTrace read_jsonl(const std::string& text) {
    CausalTrace trace;
    std::istringstream is(text);
    std::string line;
    int expected = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::exception& e) {
            throw ParseError(std::string("bad trace line: ") + e.what());
        }
        Event e;
        e.node = j.at("node").get<NodeId>();
        e.kind = event_kind_from_string(j.at("kind").get<std::string>());
        e.channel = channel_kind_from_string(j.at("channel").get<std::string>());
        e.post_consumption = j.at("post_consumption").get<bool>();
        e.op_class = j.at("op_class").get<std::string>() == "type2" ? OpClass::TypeII
                                                                    : OpClass::TypeI;
        e.noisy = j.at("noisy").get<bool>();
        e.units = j.at("units").get<long long>();
        e.unit_label = j.at("unit_label").get<std::string>();
        e.wall_step = j.at("wall_step").get<int>();
        e.causes = j.at("causes").get<std::vector<EventId>>();
        if (j.at("id").get<EventId>() != expected)
            throw ParseError("trace lines must be ordered by id");
        ++expected;
        trace.record(std::move(e));
    }
    return trace;
}

}  // namespace qnet
