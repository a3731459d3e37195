#include <doctest.h>

#include <string>
#include <vector>

#include "qnet/emit.hpp"
#include "qnet/errors.hpp"
#include "qnet/network.hpp"
#include "qnet/protocol.hpp"
#include "qnet/trace.hpp"

using namespace qnet;

namespace {

ProtocolRun teleport_run() {
    static NetworkGraph net =
        NetworkGraph::build({{0, 1, std::nullopt, OpClass::TypeII},
                             {1, 1, std::nullopt, OpClass::TypeII}},
                            {make_edge(0, 1)}, std::nullopt);
    ProtocolRunConfig cfg;
    cfg.engine = EngineKind::Dense;
    cfg.seed = 6;
    ProtocolRun run = make_run(net, cfg);
    teleport(run, 0, 0, 1);
    return run;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

TEST_CASE("dot rendering follows the visual conventions") {
    ProtocolRun run = teleport_run();
    DiagramStyle style;
    std::string dot = to_dot(run.trace, style, RenderMode::Full);

    CHECK(dot.find("digraph causal_trace") != std::string::npos);
    CHECK(dot.find("subgraph lane_0") != std::string::npos);
    CHECK(dot.find("subgraph lane_1") != std::string::npos);

    // classical message edges are dashed and metered ones drawn heavier
    CHECK(count_occurrences(dot, "style=dashed penwidth=2") == 2);
    // resource creation and consumption markers
    CHECK(count_occurrences(dot, "shape=triangle") == 2);
    CHECK(count_occurrences(dot, "shape=invtriangle") == 2);
    // local corrections are stabilizer-type dots
    CHECK(dot.find("shape=circle label=\"pauli_correction\"") != std::string::npos);

    // one node statement per event
    CHECK(count_occurrences(dot, "[shape=") == static_cast<int>(run.trace.size()));
}

TEST_CASE("hasse mode renders the transitive reduction") {
    ProtocolRun run = teleport_run();
    DiagramStyle style;
    std::string full = to_dot(run.trace, style, RenderMode::Full);
    std::string hasse = to_dot(run.trace, style, RenderMode::Hasse);
    CHECK(count_occurrences(hasse, " -> ") ==
          static_cast<int>(run.trace.hasse_reduce().size()));
    CHECK(count_occurrences(full, " -> ") == static_cast<int>(run.trace.edges().size()));
    CHECK(count_occurrences(hasse, " -> ") <= count_occurrences(full, " -> "));
}

TEST_CASE("svg output is self-contained and complete") {
    ProtocolRun run = teleport_run();
    DiagramStyle style;
    std::string svg = to_svg(run.trace, style, RenderMode::Full);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_occurrences(svg, "<line") >= static_cast<int>(run.trace.edges().size()));
    // noisy events would draw crosses; a clean teleport has none
    CHECK(svg.find("marker_noisy") == std::string::npos);
}

TEST_CASE("jsonl round-trips the trace") {
    ProtocolRun run = teleport_run();
    std::string text = to_jsonl(run.trace);
    CausalTrace back = read_jsonl(text);

    REQUIRE(back.size() == run.trace.size());
    CHECK(back.edges() == run.trace.edges());
    for (std::size_t i = 0; i < run.trace.size(); ++i) {
        const Event& a = run.trace.events()[i];
        const Event& b = back.events()[i];
        CHECK(a.id == b.id);
        CHECK(a.node == b.node);
        CHECK(a.kind == b.kind);
        CHECK(a.channel == b.channel);
        CHECK(a.post_consumption == b.post_consumption);
        CHECK(a.units == b.units);
        CHECK(a.unit_label == b.unit_label);
        CHECK(a.wall_step == b.wall_step);
    }
    CHECK(back.validate().ok());

    // one line per event
    CHECK(count_occurrences(text, "\n") == static_cast<int>(run.trace.size()));

    CHECK_THROWS_AS(read_jsonl("not json\n"), ParseError);
}

TEST_CASE("render mode parsing") {
    CHECK(render_mode_from_string("full") == RenderMode::Full);
    CHECK(render_mode_from_string("hasse") == RenderMode::Hasse);
    CHECK_THROWS_AS(render_mode_from_string("sketch"), ParseError);
}
