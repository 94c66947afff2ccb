#pragma once

#include <cmath>

namespace tracklab {

/// Axis-aligned box in continuous pixel coordinates, (x1, y1) top-left.
struct BoxTLBR {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    bool valid() const { return x1 <= x2 && y1 <= y2; }
    bool positive_area() const { return x2 > x1 && y2 > y1; }

    bool operator==(const BoxTLBR&) const = default;
};

/// Center, aspect ratio (w/h) and height: the observed part of the motion state.
struct BoxXYAH {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.0;
    double h = 0.0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

struct Size2 {
    double w = 0.0;
    double h = 0.0;
    bool operator==(const Size2&) const = default;
};

/// Integer heatmap cell plus the fractional residual of the center inside it.
struct GridCell {
    int gx = 0;
    int gy = 0;
    double offx = 0.0;
    double offy = 0.0;
};

double iou(const BoxTLBR& a, const BoxTLBR& b);
Point2 center(const BoxTLBR& b);
Size2 box_size(const BoxTLBR& b);

// Throws std::invalid_argument for negative coordinates or stride < 1. When grid
// dimensions are given, a center outside the grid throws std::out_of_range.
GridCell to_grid(double cx, double cy, int stride, int grid_w = -1, int grid_h = -1);

double smooth_l1(double a, double b);
/// d smooth_l1(a, b) / da
double smooth_l1_grad(double a, double b);

BoxXYAH tlbr_to_xyah(const BoxTLBR& b);
BoxTLBR xyah_to_tlbr(const BoxXYAH& b);
BoxTLBR tlwh_to_tlbr(double left, double top, double w, double h);
BoxTLBR box_from_center(Point2 c, Size2 s);

}  // namespace tracklab
