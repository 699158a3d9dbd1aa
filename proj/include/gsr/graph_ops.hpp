#pragma once

#include "gsr/scene_graph.hpp"

namespace gsr {

// Rewrites a possibly inconsistent graph (typically parsed from external
// text) into canonical form:
//   - contradictory bidirectional pairs collapse to the lexicographically
//     first edge,
//   - beside edges are stored with the smaller subject id,
//   - edge endpoints missing from the node list get stub nodes synthesized
//     from the id's category prefix (marked attributes["stub"] = "true"),
//   - conflicting unary states are resolved (articulation wins, else the
//     lexicographically smaller tag),
//   - self-loops are dropped, the holding edge and held_object are
//     reconciled with the edge set as the source of truth.
// Idempotent: normalize(normalize(g)) == normalize(g).
SceneGraph normalize(const SceneGraph& sg);

// Structural difference after -> before over edges and unary states.
// Geometry is not part of the delta.
EdgeDelta diff(const SceneGraph& before, const SceneGraph& after);

// Inverse of diff on the relational content: removes `removed`, inserts
// `added`, reconciles held_object with the holding edge. Throws
// DeltaMismatch when a removed item is absent and UnknownNode when an added
// endpoint has no node.
SceneGraph apply_delta(const SceneGraph& sg, const EdgeDelta& delta);

}  // namespace gsr
