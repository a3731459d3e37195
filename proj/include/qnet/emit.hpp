#pragma once

#include <string>

#include "qnet/trace.hpp"

namespace qnet {

// Full draws every causal edge; Hasse draws the transitive reduction.
enum class RenderMode { Full, Hasse };

RenderMode render_mode_from_string(const std::string& s);

// Visual conventions: classical messages dashed, quantum solid; metered
// (post-consumption) transfers drawn heavier; a plain dot for stabilizer-type
// local events and a ket-dot for general ones; crosses mark noisy events.
struct DiagramStyle {
    std::string classical_stroke = "dashed";
    std::string quantum_stroke = "solid";
    double penwidth = 1.0;
    double post_consumption_factor = 2.0;
    std::string marker_local_type1 = "circle";
    std::string marker_local_type2 = "doublecircle";  // ket-dot
    std::string marker_noisy = "diamond";             // cross
    std::string marker_message = "point";
    std::string marker_create = "triangle";
    std::string marker_consume = "invtriangle";
    int pitch_x = 90;
    int pitch_y = 70;
    int margin = 60;
};

std::string to_dot(const CausalTrace& trace, const DiagramStyle& style,
                   RenderMode mode = RenderMode::Full);
std::string to_svg(const CausalTrace& trace, const DiagramStyle& style,
                   RenderMode mode = RenderMode::Full);

// One event per line; causes hold explicit causes only (lane edges
// regenerate on replay). Ordering edges added through add_edge are not
// serialized.
std::string to_jsonl(const CausalTrace& trace);
CausalTrace read_jsonl(const std::string& text);

}  // namespace qnet
