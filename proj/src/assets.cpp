#include "gsr/assets.hpp"

#include <cstdio>

namespace gsr {

namespace {

std::vector<AssetSpec> build_catalog() {
    std::vector<AssetSpec> c;
    auto add = [&](AssetSpec s) { c.push_back(std::move(s)); };

    // Basic primitives (11): colored boxes, mugs and cubes.
    for (const char* color : {"red", "yellow", "blue"}) {
        AssetSpec box;
        box.category = std::string(color) + "_box";
        box.group = "primitives";
        box.color = color;
        box.size = {0.36, 0.36, 0.20};
        box.lidded = true;
        box.container = true;
        add(box);
    }
    for (const char* color : {"red", "yellow", "blue"}) {
        AssetSpec mug;
        mug.category = "mug";
        mug.group = "primitives";
        mug.color = color;
        mug.size = {0.075, 0.075, 0.09};
        add(mug);
    }
    for (const char* color : {"red", "yellow", "blue", "green", "white"}) {
        AssetSpec cube;
        cube.category = "cube";
        cube.group = "primitives";
        cube.color = color;
        cube.size = {0.045, 0.045, 0.045};
        add(cube);
    }

    // Articulated assets (10).
    auto articulated = [&](const char* cat, Vec3 size, int drawers, bool lidded, bool container) {
        AssetSpec a;
        a.category = cat;
        a.group = "articulated";
        a.size = size;
        a.drawers = drawers;
        a.lidded = lidded;
        a.container = container;
        add(a);
    };
    articulated("cabinet", {0.56, 0.36, 0.56}, 3, false, false);
    articulated("refrigerator", {0.45, 0.40, 0.70}, 0, true, true);
    articulated("microwave", {0.40, 0.32, 0.25}, 0, true, true);
    articulated("oven", {0.45, 0.40, 0.35}, 0, true, true);
    articulated("dishwasher", {0.45, 0.40, 0.45}, 0, true, true);
    articulated("washing_machine", {0.45, 0.45, 0.60}, 0, true, true);
    articulated("safe", {0.30, 0.30, 0.30}, 0, true, true);
    articulated("toolbox", {0.35, 0.20, 0.16}, 0, true, true);
    articulated("bread_bin", {0.32, 0.22, 0.18}, 0, true, true);
    articulated("pencil_case", {0.20, 0.08, 0.05}, 0, true, true);

    // Stable HOPE food items (14).
    auto hope = [&](const char* cat, Vec3 size) {
        AssetSpec h;
        h.category = cat;
        h.group = "hope";
        h.size = size;
        add(h);
    };
    hope("milk", {0.060, 0.060, 0.120});
    hope("ketchup", {0.050, 0.035, 0.110});
    hope("mustard", {0.050, 0.035, 0.100});
    hope("popcorn", {0.062, 0.040, 0.100});
    hope("butter", {0.062, 0.050, 0.035});
    hope("mayo", {0.050, 0.050, 0.110});
    hope("orange_juice", {0.062, 0.062, 0.120});
    hope("yogurt", {0.060, 0.060, 0.070});
    hope("tuna", {0.063, 0.063, 0.030});
    hope("cookies", {0.090, 0.045, 0.110});
    hope("granola_bars", {0.090, 0.040, 0.090});
    hope("cream_cheese", {0.062, 0.050, 0.035});
    hope("tomato_sauce", {0.062, 0.062, 0.100});
    hope("macaroni", {0.090, 0.040, 0.110});

    // Stable scanned kitchenware (11).
    auto scanned = [&](const char* cat, Vec3 size, const char* color = "") {
        AssetSpec s;
        s.category = cat;
        s.group = "scanned";
        s.size = size;
        s.color = color;
        add(s);
    };
    scanned("plate", {0.110, 0.110, 0.020});
    scanned("white_bowl", {0.100, 0.100, 0.050}, "white");
    scanned("red_bowl", {0.100, 0.100, 0.050}, "red");
    scanned("tray", {0.110, 0.090, 0.025});
    scanned("book", {0.110, 0.090, 0.030});
    scanned("cutting_board", {0.110, 0.090, 0.015});
    scanned("teapot", {0.100, 0.080, 0.090});
    scanned("saucer", {0.090, 0.090, 0.015});
    scanned("jar", {0.070, 0.070, 0.100});
    scanned("pitcher", {0.090, 0.080, 0.110});
    scanned("spatula", {0.110, 0.040, 0.020});

    // Turbosquid commercial models (17), mostly small appliances.
    auto squid = [&](const char* cat, Vec3 size, bool switchable) {
        AssetSpec t;
        t.category = cat;
        t.group = "turbosquid";
        t.size = size;
        t.switchable = switchable;
        add(t);
    };
    squid("coffee_machine", {0.110, 0.110, 0.110}, true);
    squid("toaster", {0.110, 0.080, 0.080}, true);
    squid("kettle", {0.100, 0.090, 0.110}, true);
    squid("blender", {0.090, 0.090, 0.110}, true);
    squid("lamp", {0.090, 0.090, 0.110}, true);
    squid("fan", {0.100, 0.080, 0.110}, true);
    squid("radio", {0.110, 0.060, 0.080}, true);
    squid("monitor", {0.110, 0.050, 0.110}, true);
    squid("speaker", {0.070, 0.070, 0.100}, true);
    squid("flashlight", {0.110, 0.040, 0.040}, true);
    squid("clock", {0.090, 0.040, 0.090}, false);
    squid("phone", {0.080, 0.040, 0.015}, true);
    squid("keyboard", {0.110, 0.090, 0.020}, false);
    squid("camera", {0.090, 0.050, 0.060}, true);
    squid("stapler", {0.100, 0.035, 0.040}, false);
    squid("scissors", {0.100, 0.045, 0.012}, false);
    squid("plant_pot", {0.090, 0.090, 0.090}, false);

    return c;
}

}  // namespace

const std::vector<AssetSpec>& asset_catalog() {
    static const std::vector<AssetSpec> catalog = build_catalog();
    return catalog;
}

const AssetSpec* find_asset(const std::string& category) {
    for (const AssetSpec& a : asset_catalog())
        if (a.category == category) return &a;
    return nullptr;
}

std::vector<std::string> insertable_categories() {
    // small enough that 8 of any mix pack into one box or drawer tier
    std::vector<std::string> out;
    for (const AssetSpec& a : asset_catalog()) {
        if (a.container || a.drawers > 0 || a.group == "articulated") continue;
        if (a.size.x <= 0.063 && a.size.y <= 0.063 && a.size.z <= 0.125) {
            bool seen = false;
            for (const std::string& c : out) seen |= c == a.category;
            if (!seen) out.push_back(a.category);
        }
    }
    return out;
}

ObjectNode make_object(const AssetSpec& spec, const std::string& id, double x, double y,
                       double ground_z) {
    ObjectNode n;
    n.id = id;
    n.category = spec.category;
    n.aabb = Aabb{{x - spec.size.x / 2, y - spec.size.y / 2, ground_z},
                  {x + spec.size.x / 2, y + spec.size.y / 2, ground_z + spec.size.z}};
    n.pose.position = n.aabb.center();
    if (!spec.color.empty()) n.attributes["color"] = spec.color;
    if (spec.switchable) {
        n.attributes["switchable"] = "true";
        n.states.insert("off");
    }
    if (spec.category == "mug")
        n.keypoints.push_back(
            Keypoint{"handle", {x + spec.size.x / 2, y, ground_z + spec.size.z * 0.6}, "handle"});
    return n;
}

ObjectNode make_lidded_box(const AssetSpec& spec, const std::string& id, double x, double y,
                           double ground_z, bool open) {
    ObjectNode n = make_object(spec, id, x, y, ground_z);
    Articulation lid;
    lid.joint_min = 0.0;
    lid.joint_max = 1.57;  // lid swing, radians
    lid.open_threshold = 0.10;
    lid.joint_value = open ? lid.open_threshold + 0.5 * (lid.joint_max - lid.open_threshold) : 0.0;
    n.articulation = lid;
    n.states.insert(open ? "open" : "closed");
    n.keypoints.push_back(Keypoint{"lid", {x, y - spec.size.y / 2, ground_z + spec.size.z}, "lid"});
    return n;
}

ObjectNode make_table(const std::string& id) {
    ObjectNode t;
    t.id = id;
    t.category = "table";
    t.aabb = Aabb{{-0.80, -0.60, 0.0}, {0.80, 0.60, 0.76}};
    t.pose.position = t.aabb.center();
    t.attributes["fixed"] = "true";
    return t;
}

std::vector<ObjectNode> make_cabinet(const AssetSpec& spec, const std::string& id,
                                     int first_drawer_index, double x, double y, double ground_z,
                                     bool top_drawer_open) {
    std::vector<ObjectNode> out;
    ObjectNode cab;
    cab.id = id;
    cab.category = spec.category;
    cab.aabb = Aabb{{x - spec.size.x / 2, y - spec.size.y / 2, ground_z},
                    {x + spec.size.x / 2, y + spec.size.y / 2, ground_z + spec.size.z}};
    cab.pose.position = cab.aabb.center();

    int n = spec.drawers;
    // Drawer tiers are separated by 2 cm structural gaps so stacked drawers
    // never register resting contact with each other.
    double gap = 0.02;
    double tier = (spec.size.z - gap * (n + 1)) / n;
    for (int k = 0; k < n; ++k) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "drawer_%02d", first_drawer_index + k);
        ObjectNode d;
        d.id = buf;
        d.category = "drawer";
        // top drawer first: k = 0 is the highest tier
        double z1 = ground_z + spec.size.z - gap - (tier + gap) * k;
        double z0 = z1 - tier;
        d.aabb = Aabb{{x - spec.size.x / 2 + 0.02, y - spec.size.y / 2 + 0.02, z0},
                      {x + spec.size.x / 2 - 0.02, y + spec.size.y / 2 - 0.02, z1}};
        d.pose.position = d.aabb.center();
        Articulation art;
        art.joint_min = 0.0;
        art.joint_max = 0.25;  // slide-out distance (m)
        art.open_threshold = 0.05;
        art.joint_value = 0.0;
        d.articulation = art;
        d.states.insert("closed");
        d.attributes["slide_dir"] = "-y";
        d.keypoints.push_back(Keypoint{"handle", {x, y - spec.size.y / 2, (z0 + z1) / 2}, "handle"});
        cab.children.push_back(d.id);
        out.push_back(std::move(d));
    }
    out.insert(out.begin(), std::move(cab));

    if (top_drawer_open && n > 0) {
        ObjectNode& top = out[1];
        Articulation& art = *top.articulation;
        double next = art.open_threshold + 0.5 * (art.joint_max - art.open_threshold);
        Vec3 d{0, -(next - art.joint_value), 0};
        top.aabb = top.aabb.translated(d);
        top.pose.position = top.pose.position + d;
        for (Keypoint& kp : top.keypoints) kp.position = kp.position + d;
        art.joint_value = next;
        top.states = {"open"};
    }
    return out;
}

}  // namespace gsr
