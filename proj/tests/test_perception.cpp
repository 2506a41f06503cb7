#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "synchroflow/error.hpp"
#include "synchroflow/perception.hpp"

#include "oracles.hpp"

using namespace synchroflow;
using namespace synchroflow::perception;

namespace {

std::string read_fixture(const std::string& name) {
    const std::string path = std::string(FIXTURES_DIR) + "/voc/" + name;
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing fixture: " << path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

BoundingBox box_of(ComponentLabel label, int xmin, int ymin, int xmax, int ymax) {
    BoundingBox box;
    box.label = label;
    box.xmin = xmin;
    box.ymin = ymin;
    box.xmax = xmax;
    box.ymax = ymax;
    return box;
}

const char* kGoodFixtures[] = {
    "pc_desktop_full.xml", "single_motherboard.xml", "fan_and_cables.xml",
    "screws_grid.xml",     "tight_edges.xml",
};

}  // namespace

TEST_CASE("VOC fixtures parse with the expected content") {
    const auto full = parse_voc(read_fixture("pc_desktop_full.xml"));
    CHECK(full.filename == "pc_desktop_full.jpg");
    CHECK(full.width == 640);
    CHECK(full.height == 480);
    REQUIRE(full.objects.size() == 8);
    CHECK(full.objects[0].label == ComponentLabel::motherboard);
    CHECK(full.objects[1].label == ComponentLabel::fan);
    CHECK(full.objects[2].label == ComponentLabel::cable);
    CHECK(full.objects[4].label == ComponentLabel::screw);
    CHECK(full.objects[0].xmin == 120);
    CHECK(full.objects[0].ymax == 320);

    const auto grid = parse_voc(read_fixture("screws_grid.xml"));
    CHECK(grid.objects.size() == 6);
    for (const auto& box : grid.objects) CHECK(box.label == ComponentLabel::screw);
}

TEST_CASE("every good fixture round-trips through serialize/parse") {
    for (const char* name : kGoodFixtures) {
        CAPTURE(name);
        const auto first = parse_voc(read_fixture(name));
        const auto again = parse_voc(serialize_voc(first));
        CHECK(first == again);
        // Serialization itself is a fixed point once normalized.
        CHECK(serialize_voc(first) == serialize_voc(again));
    }
}

TEST_CASE("VOC parser rejects labels outside the 4-class schema") {
    CHECK_THROWS_WITH_AS(parse_voc(read_fixture("bad_label_keyboard.xml")),
                         doctest::Contains("keyboard"), Error);
    try {
        parse_voc(read_fixture("bad_label_keyboard.xml"));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_label);
    }
}

TEST_CASE("VOC parser rejects malformed and out-of-contract documents") {
    CHECK_THROWS_AS(parse_voc(read_fixture("malformed.xml")), Error);
    CHECK_THROWS_AS(parse_voc("not xml at all"), Error);
    CHECK_THROWS_AS(parse_voc("<annotation><filename>x</filename></annotation>"),
                    Error);

    // Box beyond image bounds.
    CHECK_THROWS_AS(
        parse_voc("<annotation><filename>f</filename>"
                  "<size><width>100</width><height>100</height></size>"
                  "<object><name>fan</name><bndbox><xmin>50</xmin><ymin>50</ymin>"
                  "<xmax>120</xmax><ymax>90</ymax></bndbox></object></annotation>"),
        Error);
    // Degenerate box (zero width).
    CHECK_THROWS_AS(
        parse_voc("<annotation><filename>f</filename>"
                  "<size><width>100</width><height>100</height></size>"
                  "<object><name>fan</name><bndbox><xmin>50</xmin><ymin>50</ymin>"
                  "<xmax>50</xmax><ymax>90</ymax></bndbox></object></annotation>"),
        Error);
}

TEST_CASE("label names are case-insensitive and closed") {
    CHECK(label_from_name("Fan") == ComponentLabel::fan);
    CHECK(label_from_name("MOTHERBOARD") == ComponentLabel::motherboard);
    CHECK_FALSE(label_from_name("keyboard"));
    CHECK_FALSE(label_from_name(""));
}

TEST_CASE("contact geometry matches the worked examples") {
    // Screw: the center of the box, ties rounded half-up.
    auto screw = derive_contacts(box_of(ComponentLabel::screw, 10, 10, 20, 20));
    CHECK(screw.strategy == ContactStrategy::screwdriver_point);
    CHECK(screw.points == std::vector<std::pair<int, int>>{{15, 15}});

    auto screw_odd = derive_contacts(box_of(ComponentLabel::screw, 10, 10, 21, 21));
    CHECK(screw_odd.points == std::vector<std::pair<int, int>>{{16, 16}});

    // Motherboard: the four corners, fixed winding order.
    auto board = derive_contacts(box_of(ComponentLabel::motherboard, 0, 0, 4, 2));
    CHECK(board.strategy == ContactStrategy::suction_quad);
    CHECK(board.points ==
          std::vector<std::pair<int, int>>{{0, 0}, {4, 0}, {4, 2}, {0, 2}});

    // Wide cable: contacts on the long (top/bottom) sides.
    auto cable = derive_contacts(box_of(ComponentLabel::cable, 0, 0, 40, 10));
    CHECK(cable.strategy == ContactStrategy::antipodal_grip);
    CHECK(cable.points == std::vector<std::pair<int, int>>{{20, 0}, {20, 10}});

    // Tall fan: contacts on the left/right sides.
    auto fan = derive_contacts(box_of(ComponentLabel::fan, 0, 0, 10, 40));
    CHECK(fan.points == std::vector<std::pair<int, int>>{{0, 20}, {10, 20}});

    // Square ties break to the vertical closing axis.
    auto square = derive_contacts(box_of(ComponentLabel::fan, 0, 0, 10, 10));
    CHECK(square.points == std::vector<std::pair<int, int>>{{5, 0}, {5, 10}});

    // Odd width rounds the midpoint half-up.
    auto odd = derive_contacts(box_of(ComponentLabel::cable, 0, 0, 11, 10));
    CHECK(odd.points == std::vector<std::pair<int, int>>{{6, 0}, {6, 10}});

    CHECK_THROWS_AS(derive_contacts(box_of(ComponentLabel::fan, 5, 5, 5, 9)), Error);
}

TEST_CASE("contact geometry holds over random boxes") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 2'000; ++i) {
        const int xmin = static_cast<int>(rng() % 500);
        const int ymin = static_cast<int>(rng() % 500);
        const int xmax = xmin + 1 + static_cast<int>(rng() % 400);
        const int ymax = ymin + 1 + static_cast<int>(rng() % 400);
        const auto label = static_cast<ComponentLabel>(rng() % 4);
        const auto box = box_of(label, xmin, ymin, xmax, ymax);
        const auto plan = derive_contacts(box);

        const int mid_x = oracle::half_up((xmin + xmax) / 2.0);
        const int mid_y = oracle::half_up((ymin + ymax) / 2.0);
        switch (label) {
            case ComponentLabel::screw:
                REQUIRE(plan.points.size() == 1);
                CHECK(plan.points[0] == std::pair<int, int>{mid_x, mid_y});
                break;
            case ComponentLabel::motherboard:
                REQUIRE(plan.points.size() == 4);
                break;
            case ComponentLabel::cable:
            case ComponentLabel::fan: {
                REQUIRE(plan.points.size() == 2);
                const auto& [x1, y1] = plan.points[0];
                const auto& [x2, y2] = plan.points[1];
                if (xmax - xmin >= ymax - ymin) {
                    CHECK(x1 == mid_x);
                    CHECK(x2 == mid_x);
                    CHECK(y1 == ymin);
                    CHECK(y2 == ymax);
                } else {
                    CHECK(y1 == mid_y);
                    CHECK(y2 == mid_y);
                    CHECK(x1 == xmin);
                    CHECK(x2 == xmax);
                }
                break;
            }
        }
        // Every contact stays on the box boundary or inside it.
        for (const auto& [x, y] : plan.points) {
            CHECK(x >= xmin);
            CHECK(x <= xmax);
            CHECK(y >= ymin);
            CHECK(y <= ymax);
        }
    }
}

TEST_CASE("bill of materials loads and totals the shipped config") {
    const auto bom = BillOfMaterials::load(std::string(CONFIGS_DIR) +
                                           "/bom_pc_desktop.json");
    CHECK(bom.total_mass(ComponentLabel::motherboard) == *Decimal::parse("0.1503"));
    CHECK(bom.total_mass(ComponentLabel::fan) == *Decimal::parse("0.12"));
    CHECK(bom.total_mass(ComponentLabel::cable) == *Decimal::parse("0.05"));
    CHECK(bom.total_mass(ComponentLabel::screw) == *Decimal::parse("0.005"));

    BillOfMaterials empty;
    CHECK_THROWS_WITH_AS(empty.total_mass(ComponentLabel::fan),
                         doctest::Contains("fan"), Error);
}

TEST_CASE("bill of materials rejects bad config text") {
    CHECK_THROWS_AS(BillOfMaterials::from_json_text("not json"), Error);
    CHECK_THROWS_AS(BillOfMaterials::from_json_text("[]"), Error);
    CHECK_THROWS_AS(BillOfMaterials::from_json_text(
                        R"({"keyboard":[{"material":"x","mass_kg":"1"}]})"),
                    Error);
    CHECK_THROWS_AS(BillOfMaterials::from_json_text(
                        R"({"fan":[{"material":"x","mass_kg":"-1"}]})"),
                    Error);
    CHECK_THROWS_AS(BillOfMaterials::from_json_text(
                        R"({"fan":[{"material":"x","mass_kg":0.08}]})"),
                    Error);
}

TEST_CASE("detections convert to extraction events that conserve BOM mass") {
    const auto bom = BillOfMaterials::load(std::string(CONFIGS_DIR) +
                                           "/bom_pc_desktop.json");
    std::vector<BoundingBox> boxes = {
        box_of(ComponentLabel::motherboard, 10, 10, 200, 150),
        box_of(ComponentLabel::fan, 220, 10, 300, 90),
        box_of(ComponentLabel::screw, 30, 30, 40, 40),
    };
    boxes[2].confidence = 0.3;  // below the default threshold: skipped

    DetectionEventOptions options;
    options.node_id = "vision-1";
    options.seq_start = 100;
    options.ts_ms = 42'000;
    options.from_process = "use";
    options.to_process = "disassembly";

    const auto events = detections_to_events(boxes, bom, options);
    // motherboard has 3 materials, fan has 2; the low-confidence screw drops.
    REQUIRE(events.size() == 5);

    Decimal total;
    uint64_t seq_expected = 100;
    for (const auto& e : events) {
        CHECK(e.node_id == "vision-1");
        CHECK(e.seq == seq_expected++);
        CHECK(e.ts_ms == 42'000);
        CHECK(e.kind == events::EventKind::disassembly_extraction);
        CHECK(e.from == "use");
        CHECK(e.to == "disassembly");
        total += e.mass_kg;
    }
    CHECK(total == bom.total_mass(ComponentLabel::motherboard) +
                       bom.total_mass(ComponentLabel::fan));

    // A label with no BOM entry fails loudly, naming the label.
    BillOfMaterials partial;
    partial.set_entries(ComponentLabel::fan,
                        {{"aluminum", *Decimal::parse("0.08")}});
    std::vector<BoundingBox> cable_only = {
        box_of(ComponentLabel::cable, 0, 0, 50, 10)};
    CHECK_THROWS_WITH_AS(detections_to_events(cable_only, partial, options),
                         doctest::Contains("cable"), Error);
}

TEST_CASE("overlay SVG renders byte-exactly for a known scene") {
    VocAnnotation annotation;
    annotation.filename = "tiny.jpg";
    annotation.width = 100;
    annotation.height = 80;
    annotation.objects = {box_of(ComponentLabel::screw, 10, 10, 20, 20)};
    const std::vector<ContactPlan> plans = {derive_contacts(annotation.objects[0])};

    CHECK(render_overlay(annotation, plans) ==
          "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"100\" "
          "height=\"80\" viewBox=\"0 0 100 80\">\n"
          "  <rect x=\"0\" y=\"0\" width=\"100\" height=\"80\" fill=\"none\" "
          "stroke=\"#333333\" stroke-width=\"1\"/>\n"
          "  <rect x=\"10\" y=\"10\" width=\"10\" height=\"10\" fill=\"none\" "
          "stroke=\"green\" stroke-width=\"2\"/>\n"
          "  <circle cx=\"15\" cy=\"15\" r=\"6\" fill=\"none\" stroke=\"red\" "
          "stroke-width=\"2\"/>\n"
          "</svg>\n");
}

TEST_CASE("overlay colors follow the class scheme") {
    const auto annotation = parse_voc(read_fixture("pc_desktop_full.xml"));
    std::vector<ContactPlan> plans;
    for (const auto& box : annotation.objects) plans.push_back(derive_contacts(box));
    const auto svg = render_overlay(annotation, plans);

    CHECK(svg.find("stroke=\"blue\"") != std::string::npos);    // motherboard
    CHECK(svg.find("stroke=\"yellow\"") != std::string::npos);  // fan
    CHECK(svg.find("stroke=\"red\"") != std::string::npos);     // cable
    CHECK(svg.find("stroke=\"green\"") != std::string::npos);   // screw

    // Plan count must match the box count.
    plans.pop_back();
    CHECK_THROWS_AS(render_overlay(annotation, plans), Error);
}
