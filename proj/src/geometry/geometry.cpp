#include "tracklab/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tracklab {

double iou(const BoxTLBR& a, const BoxTLBR& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

Point2 center(const BoxTLBR& b) { return {(b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0}; }

Size2 box_size(const BoxTLBR& b) { return {b.x2 - b.x1, b.y2 - b.y1}; }

GridCell to_grid(double cx, double cy, int stride, int grid_w, int grid_h) {
    if (stride < 1) throw std::invalid_argument("to_grid: stride must be >= 1");
    if (!(cx >= 0.0) || !(cy >= 0.0)) {
        throw std::invalid_argument("to_grid: negative center (" + std::to_string(cx) + ", " +
                                    std::to_string(cy) + ")");
    }
    const double sx = cx / stride;
    const double sy = cy / stride;
    GridCell cell;
    cell.gx = static_cast<int>(std::floor(sx));
    cell.gy = static_cast<int>(std::floor(sy));
    cell.offx = sx - cell.gx;
    cell.offy = sy - cell.gy;
    if ((grid_w >= 0 && cell.gx >= grid_w) || (grid_h >= 0 && cell.gy >= grid_h)) {
        throw std::out_of_range("to_grid: center (" + std::to_string(cx) + ", " +
                                std::to_string(cy) + ") falls outside the heatmap");
    }
    return cell;
}

double smooth_l1(double a, double b) {
    const double d = std::abs(a - b);
    return d < 1.0 ? 0.5 * d * d : d - 0.5;
}

double smooth_l1_grad(double a, double b) {
    const double d = a - b;
    if (std::abs(d) < 1.0) return d;
    return d > 0.0 ? 1.0 : -1.0;
}

BoxXYAH tlbr_to_xyah(const BoxTLBR& b) {
    const double h = b.height();
    if (!(h > 0.0)) throw std::invalid_argument("tlbr_to_xyah: non-positive height");
    const Point2 c = center(b);
    return {c.x, c.y, b.width() / h, h};
}

BoxTLBR xyah_to_tlbr(const BoxXYAH& b) {
    if (!(b.h > 0.0)) throw std::invalid_argument("xyah_to_tlbr: non-positive height");
    const double w = b.a * b.h;
    return {b.cx - w / 2.0, b.cy - b.h / 2.0, b.cx + w / 2.0, b.cy + b.h / 2.0};
}

BoxTLBR tlwh_to_tlbr(double left, double top, double w, double h) {
    return {left, top, left + w, top + h};
}

BoxTLBR box_from_center(Point2 c, Size2 s) {
    return {c.x - s.w / 2.0, c.y - s.h / 2.0, c.x + s.w / 2.0, c.y + s.h / 2.0};
}

}  // namespace tracklab
