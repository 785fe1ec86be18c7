#include "boxmatch/geometry.hpp"

#include <algorithm>

namespace boxmatch {

Corners to_corners(const BoundingBox& b) {
    return {b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.cx + b.w / 2.0, b.cy + b.h / 2.0};
}

BoundingBox from_corners(double x1, double y1, double x2, double y2) {
    return {(x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1};
}

double box_area(const BoundingBox& b) {
    return b.w * b.h;
}

namespace {

double intersection_area(const Corners& a, const Corners& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
    const Corners ca = to_corners(a);
    const Corners cb = to_corners(b);
    const double inter = intersection_area(ca, cb);
    const double uni = box_area(a) + box_area(b) - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double giou(const BoundingBox& a, const BoundingBox& b) {
    const Corners ca = to_corners(a);
    const Corners cb = to_corners(b);
    const double inter = intersection_area(ca, cb);
    const double uni = box_area(a) + box_area(b) - inter;
    const double ew = std::max(ca.x2, cb.x2) - std::min(ca.x1, cb.x1);
    const double eh = std::max(ca.y2, cb.y2) - std::min(ca.y1, cb.y1);
    const double enclose = ew * eh;
    if (enclose <= 0.0) return 0.0;
    const double overlap = uni > 0.0 ? inter / uni : 0.0;
    return overlap - (enclose - uni) / enclose;
}

}  // namespace boxmatch
