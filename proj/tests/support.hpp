#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "tracklab/assignment.hpp"
#include "tracklab/attack.hpp"

namespace testsupport {

using namespace tracklab;

// Exhaustive search over partial injections row -> col: most finite pairs, then least total.
inline std::pair<int, double> brute_force(const CostMatrix& c) {
    int best_n = -1;
    double best = kInfCost;
    std::vector<int> perm(static_cast<std::size_t>(std::max(c.rows(), c.cols())));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        int n = 0;
        double total = 0.0;
        for (int r = 0; r < c.rows(); ++r) {
            const int col = perm[r];
            if (col >= c.cols() || std::isinf(c(r, col))) continue;
            ++n;
            total += c(r, col);
        }
        if (n > best_n || (n == best_n && total < best)) {
            best_n = n;
            best = total;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best_n, best};
}

inline CostMatrix random_cost(std::mt19937_64& rng, int rows, int cols, int flavor) {
    std::uniform_real_distribution<double> u(0.0, 10.0), coin(0.0, 1.0);
    std::uniform_int_distribution<int> small(0, 4);
    CostMatrix c(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int q = 0; q < cols; ++q) {
            c(r, q) = flavor % 3 == 0 ? small(rng) : u(rng);
            if (flavor % 2 == 1 && coin(rng) < 0.25) c(r, q) = kInfCost;
        }
    }
    return c;
}

enum class LossKind { pp, cl, reg, full };

struct GradContext {
    SensorMaps maps;
    Perturbation pert;
    Objective obj;
};

// Random maps and objective with every heat value read by the loss kept away from
// the clip bounds, so the loss is smooth around the evaluation point.
inline GradContext make_grad_context(std::uint64_t seed, LossKind kind) {
    const GridShape shape{16, 12, 4, 8};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> heat(0.1, 0.9), small(-0.02, 0.02), size(10.0, 40.0), off(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<int> gx(1, shape.width - 2), gy(1, shape.height - 2);

    GradContext ctx{SensorMaps(shape), Perturbation(shape), {}};
    for (double& v : ctx.maps.heat.data()) v = heat(rng);
    for (double& v : ctx.pert.heat.data()) v = small(rng);
    for (int y = 0; y < shape.height; ++y) {
        for (int x = 0; x < shape.width; ++x) {
            ctx.maps.size.at(x, y, 0) = size(rng);
            ctx.maps.size.at(x, y, 1) = size(rng);
            ctx.maps.off.at(x, y, 0) = off(rng);
            ctx.maps.off.at(x, y, 1) = off(rng);
            for (double& v : ctx.maps.feat.cell_mut(x, y)) v = n(rng);
        }
    }
    auto unit = [&] {
        std::vector<double> v(8);
        for (double& x : v) x = n(rng);
        return Feature::normalized(v);
    };
    const CellXY ci{gx(rng), gy(rng)}, cj{gx(rng), gy(rng)};
    if (kind == LossKind::pp || kind == LossKind::full) ctx.obj.pp = PushPullTerm{unit(), unit(), ci, cj};
    if (kind == LossKind::cl || kind == LossKind::full) {
        ctx.obj.heat = {cj, {gx(rng), gy(rng)}};
        ctx.obj.cool = {ci};
    }
    if (kind == LossKind::reg || kind == LossKind::full) {
        std::uniform_real_distribution<double> jitter(-4.0, 4.0);
        for (CellXY c : {ci, cj}) {
            ctx.obj.reg.push_back({c, ctx.maps.size.at(c.gx, c.gy, 0) + jitter(rng),
                                   ctx.maps.size.at(c.gx, c.gy, 1) + jitter(rng), off(rng), off(rng)});
        }
    }
    return ctx;
}

struct GradCheck {
    double max_rel = 0.0;     // worst entry, |analytic - numeric| / max(|numeric|, 1e-6)
    double global_rel = 0.0;  // ||analytic - numeric|| / ||numeric||
    int entries = 0;
};

// Central differences with step h over every perturbation entry the loss can read.
inline GradCheck check_gradient(const GradContext& ctx, double h = 1e-5) {
    const Perturbation g = grad_total(ctx.maps, ctx.pert, ctx.obj);
    GradCheck out;
    double diff2 = 0.0, ref2 = 0.0;
    auto compare = [&](double analytic, double numeric) {
        const double d = std::abs(analytic - numeric);
        out.max_rel = std::max(out.max_rel, d / std::max(std::abs(numeric), 1e-6));
        diff2 += d * d;
        ref2 += numeric * numeric;
        ++out.entries;
    };
    auto fd = [&](auto&& poke) {
        Perturbation p = ctx.pert, m = ctx.pert;
        poke(p, h);
        poke(m, -h);
        return (total_loss(ctx.maps, p, ctx.obj) - total_loss(ctx.maps, m, ctx.obj)) / (2 * h);
    };
    const GridShape& s = ctx.maps.shape;
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            const double num_heat = fd([&](Perturbation& p, double d) { p.heat.at(x, y) += d; });
            if (num_heat != 0.0 || g.heat.at(x, y) != 0.0) compare(g.heat.at(x, y), num_heat);
            for (int ch = 0; ch < 2; ++ch) {
                const double ns = fd([&](Perturbation& p, double d) { p.size.at(x, y, ch) += d; });
                if (ns != 0.0 || g.size.at(x, y, ch) != 0.0) compare(g.size.at(x, y, ch), ns);
                const double no = fd([&](Perturbation& p, double d) { p.off.at(x, y, ch) += d; });
                if (no != 0.0 || g.off.at(x, y, ch) != 0.0) compare(g.off.at(x, y, ch), no);
            }
            const auto gf = g.feat.cell(x, y);
            for (int k = 0; k < s.feat_dim; ++k) {
                const double nf = fd([&](Perturbation& p, double d) { p.feat.cell_mut(x, y)[k] += d; });
                const double af = gf.empty() ? 0.0 : gf[k];
                if (nf != 0.0 || af != 0.0) compare(af, nf);
            }
        }
    }
    out.global_rel = ref2 > 0.0 ? std::sqrt(diff2 / ref2) : std::sqrt(diff2);
    return out;
}

}  // namespace testsupport
