#pragma once

namespace boxmatch {

// Axis-aligned box in center-size form, coordinates normalized to [0,1]
// relative to the image. All library arithmetic is double precision.
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct Corners {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;
};

Corners to_corners(const BoundingBox& b);
BoundingBox from_corners(double x1, double y1, double x2, double y2);

double box_area(const BoundingBox& b);

// Intersection over union in [0,1]; degenerate boxes yield 0, never an error.
double iou(const BoundingBox& a, const BoundingBox& b);

// Generalized IoU in (-1, 1]: iou minus the empty fraction of the minimal
// enclosing box. Zero-area enclosing box yields 0.
double giou(const BoundingBox& a, const BoundingBox& b);

}  // namespace boxmatch
