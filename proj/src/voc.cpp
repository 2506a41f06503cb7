#include <algorithm>
#include <cctype>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "synchroflow/error.hpp"
#include "synchroflow/perception.hpp"

namespace synchroflow::perception {

namespace pt = boost::property_tree;

const char* label_name(ComponentLabel label) noexcept {
    switch (label) {
        case ComponentLabel::cable: return "cable";
        case ComponentLabel::screw: return "screw";
        case ComponentLabel::fan: return "fan";
        case ComponentLabel::motherboard: return "motherboard";
    }
    return "cable";
}

std::optional<ComponentLabel> label_from_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "cable") return ComponentLabel::cable;
    if (lower == "screw") return ComponentLabel::screw;
    if (lower == "fan") return ComponentLabel::fan;
    if (lower == "motherboard") return ComponentLabel::motherboard;
    return std::nullopt;
}

namespace {

int require_int(const pt::ptree& tree, const std::string& path) {
    auto value = tree.get_optional<std::string>(path);
    if (!value) throw Error(Errc::malformed_xml, "missing element: " + path);
    try {
        size_t consumed = 0;
        int parsed = std::stoi(*value, &consumed);
        if (consumed != value->size())
            throw Error(Errc::malformed_xml, "non-integer element: " + path);
        return parsed;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(Errc::malformed_xml, "non-integer element: " + path);
    }
}

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

void check_box(const BoundingBox& box, int width, int height) {
    if (box.xmin >= box.xmax || box.ymin >= box.ymax)
        throw Error(Errc::degenerate_box,
                    "degenerate box: xmin/ymin must be less than xmax/ymax");
    if (box.xmin < 0 || box.ymin < 0 || box.xmax > width || box.ymax > height)
        throw Error(Errc::box_out_of_bounds, "box exceeds image bounds");
}

}  // namespace

VocAnnotation parse_voc(const std::string& xml_text) {
    pt::ptree doc;
    std::istringstream stream(xml_text);
    try {
        pt::read_xml(stream, doc, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw Error(Errc::malformed_xml, e.what());
    }

    auto annotation = doc.get_child_optional("annotation");
    if (!annotation)
        throw Error(Errc::malformed_xml, "missing <annotation> root element");

    VocAnnotation result;
    auto filename = annotation->get_optional<std::string>("filename");
    if (!filename) throw Error(Errc::malformed_xml, "missing element: filename");
    result.filename = *filename;
    result.width = require_int(*annotation, "size.width");
    result.height = require_int(*annotation, "size.height");
    if (result.width <= 0 || result.height <= 0)
        throw Error(Errc::malformed_xml, "image size must be positive");

    for (const auto& [name, child] : *annotation) {
        if (name != "object") continue;
        auto object_name = child.get_optional<std::string>("name");
        if (!object_name) throw Error(Errc::malformed_xml, "object lacks <name>");
        auto label = label_from_name(*object_name);
        if (!label)
            throw Error(Errc::unknown_label, "label outside the 4-class schema: " +
                                                 *object_name);
        BoundingBox box;
        box.label = *label;
        box.xmin = require_int(child, "bndbox.xmin");
        box.ymin = require_int(child, "bndbox.ymin");
        box.xmax = require_int(child, "bndbox.xmax");
        box.ymax = require_int(child, "bndbox.ymax");
        check_box(box, result.width, result.height);
        result.objects.push_back(box);
    }
    return result;
}

std::string serialize_voc(const VocAnnotation& annotation) {
    std::string out = "<annotation>\n";
    out += "  <filename>" + xml_escape(annotation.filename) + "</filename>\n";
    out += "  <size>\n";
    out += "    <width>" + std::to_string(annotation.width) + "</width>\n";
    out += "    <height>" + std::to_string(annotation.height) + "</height>\n";
    out += "  </size>\n";
    for (const auto& box : annotation.objects) {
        out += "  <object>\n";
        out += "    <name>" + std::string(label_name(box.label)) + "</name>\n";
        out += "    <bndbox>\n";
        out += "      <xmin>" + std::to_string(box.xmin) + "</xmin>\n";
        out += "      <ymin>" + std::to_string(box.ymin) + "</ymin>\n";
        out += "      <xmax>" + std::to_string(box.xmax) + "</xmax>\n";
        out += "      <ymax>" + std::to_string(box.ymax) + "</ymax>\n";
        out += "    </bndbox>\n";
        out += "  </object>\n";
    }
    out += "</annotation>\n";
    return out;
}

}  // namespace synchroflow::perception
