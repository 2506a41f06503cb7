#include "synchroflow/error.hpp"
#include "synchroflow/perception.hpp"

namespace synchroflow::perception {

namespace {

const char* class_color(ComponentLabel label) {
    switch (label) {
        case ComponentLabel::motherboard: return "blue";
        case ComponentLabel::fan: return "yellow";
        case ComponentLabel::cable: return "red";
        case ComponentLabel::screw: return "green";
    }
    return "red";
}

}  // namespace

std::string render_overlay(const VocAnnotation& annotation,
                           const std::vector<ContactPlan>& plans) {
    if (plans.size() != annotation.objects.size())
        throw Error(Errc::bad_config, "plan count does not match box count");

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(annotation.width) + "\" height=\"" +
           std::to_string(annotation.height) + "\" viewBox=\"0 0 " +
           std::to_string(annotation.width) + " " + std::to_string(annotation.height) +
           "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(annotation.width) +
           "\" height=\"" + std::to_string(annotation.height) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    for (size_t i = 0; i < annotation.objects.size(); ++i) {
        const auto& box = annotation.objects[i];
        svg += "  <rect x=\"" + std::to_string(box.xmin) + "\" y=\"" +
               std::to_string(box.ymin) + "\" width=\"" +
               std::to_string(box.xmax - box.xmin) + "\" height=\"" +
               std::to_string(box.ymax - box.ymin) + "\" fill=\"none\" stroke=\"" +
               class_color(box.label) + "\" stroke-width=\"2\"/>\n";

        const auto& plan = plans[i];
        for (const auto& [x, y] : plan.points) {
            if (plan.strategy == ContactStrategy::screwdriver_point) {
                svg += "  <circle cx=\"" + std::to_string(x) + "\" cy=\"" +
                       std::to_string(y) +
                       "\" r=\"6\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
            } else {
                svg += "  <circle cx=\"" + std::to_string(x) + "\" cy=\"" +
                       std::to_string(y) + "\" r=\"4\" fill=\"red\"/>\n";
            }
        }
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace synchroflow::perception
