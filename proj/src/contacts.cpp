#include "synchroflow/error.hpp"
#include "synchroflow/perception.hpp"

namespace synchroflow::perception {

namespace {

// Half-up rounding of n/2 (ties toward +infinity), exact in integers.
int round_half_sum(int a, int b) {
    int n = a + b;  // midpoint numerator over denominator 2
    int shifted = n + 1;
    // floor(shifted / 2) for either sign
    return shifted >= 0 ? shifted / 2 : (shifted - 1) / 2;
}

void require_valid(const BoundingBox& box) {
    if (box.xmin >= box.xmax || box.ymin >= box.ymax)
        throw Error(Errc::degenerate_box, "degenerate box");
}

}  // namespace

const char* strategy_name(ContactStrategy strategy) noexcept {
    switch (strategy) {
        case ContactStrategy::antipodal_grip: return "antipodal_grip";
        case ContactStrategy::suction_quad: return "suction_quad";
        case ContactStrategy::screwdriver_point: return "screwdriver_point";
    }
    return "screwdriver_point";
}

ClosingAxis closing_axis(const BoundingBox& box) {
    require_valid(box);
    int width = box.xmax - box.xmin;
    int height = box.ymax - box.ymin;
    // Contacts go on the longer sides; a square closes vertically.
    return width >= height ? ClosingAxis::vertical : ClosingAxis::horizontal;
}

ContactPlan derive_contacts(const BoundingBox& box) {
    require_valid(box);
    ContactPlan plan;
    switch (box.label) {
        case ComponentLabel::cable:
        case ComponentLabel::fan: {
            plan.strategy = ContactStrategy::antipodal_grip;
            if (closing_axis(box) == ClosingAxis::vertical) {
                int mid_x = round_half_sum(box.xmin, box.xmax);
                plan.points = {{mid_x, box.ymin}, {mid_x, box.ymax}};
            } else {
                int mid_y = round_half_sum(box.ymin, box.ymax);
                plan.points = {{box.xmin, mid_y}, {box.xmax, mid_y}};
            }
            break;
        }
        case ComponentLabel::motherboard:
            plan.strategy = ContactStrategy::suction_quad;
            plan.points = {{box.xmin, box.ymin},
                           {box.xmax, box.ymin},
                           {box.xmax, box.ymax},
                           {box.xmin, box.ymax}};
            break;
        case ComponentLabel::screw:
            plan.strategy = ContactStrategy::screwdriver_point;
            plan.points = {{round_half_sum(box.xmin, box.xmax),
                            round_half_sum(box.ymin, box.ymax)}};
            break;
    }
    return plan;
}

}  // namespace synchroflow::perception
