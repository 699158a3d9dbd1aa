#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsr/geometry.hpp"
#include "gsr/scene_graph.hpp"

namespace gsr {

// One entry of the 63-type asset library backing the benchmark suites and
// the random-scene samplers.
struct AssetSpec {
    std::string category;
    std::string group;   // primitives | articulated | hope | scanned | turbosquid
    std::string color;   // fixed color attribute, empty if none
    Vec3 size;           // full extents (m)
    bool lidded = false;       // open/close via a lid joint
    bool container = false;    // objects can be placed inside
    bool switchable = false;   // supports turn on / turn off
    int drawers = 0;           // articulated drawer children
};

// The full catalog. 63 entries: 11 primitives, 10 articulated, 14 HOPE
// food items, 11 scanned kitchenware, 17 commercial models.
const std::vector<AssetSpec>& asset_catalog();

const AssetSpec* find_asset(const std::string& category);

// Categories whose footprint fits box and drawer interiors; used when
// sampling container contents.
std::vector<std::string> insertable_categories();

// Builders. Ids are assigned by the caller; geometry is placed so the
// object's base sits at ground_z, centered at (x, y).
ObjectNode make_object(const AssetSpec& spec, const std::string& id, double x, double y,
                       double ground_z);

// A lidded box: articulated (lid joint), open or closed.
ObjectNode make_lidded_box(const AssetSpec& spec, const std::string& id, double x, double y,
                           double ground_z, bool open);

// The tabletop fixture every scene stands on.
ObjectNode make_table(const std::string& id);

// A cabinet with `drawers` stacked drawer children sliding toward -y.
// Returns the cabinet followed by its drawer nodes (top first); drawer ids
// are <base>_0k with k starting at first_drawer_index.
std::vector<ObjectNode> make_cabinet(const AssetSpec& spec, const std::string& id,
                                     int first_drawer_index, double x, double y, double ground_z,
                                     bool top_drawer_open);

}  // namespace gsr
