#include "clad/digits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clad/rng.hpp"

namespace clad {

namespace {

struct Point {
    double x, y;
};

using Polyline = std::vector<Point>;

Polyline arc(double cx, double cy, double rx, double ry, double a0_deg, double a1_deg,
             std::size_t segments = 20) {
    Polyline p;
    for (std::size_t i = 0; i <= segments; ++i) {
        double a = (a0_deg + (a1_deg - a0_deg) * static_cast<double>(i) / segments) *
                   std::numbers::pi / 180.0;
        p.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return p;
}

// Glyphs on the unit square, y pointing down. {0,3,8} curly, {1,4,7} straight,
// {2,5,6,9} mixed, matching the digit-shape super-categories.
std::vector<Polyline> glyph(int digit) {
    switch (digit) {
        case 0:
            return {arc(0.5, 0.5, 0.21, 0.32, 0, 360, 32)};
        case 1:
            return {{{0.38, 0.28}, {0.52, 0.16}}, {{0.52, 0.16}, {0.52, 0.84}}};
        case 2:
            return {arc(0.5, 0.35, 0.19, 0.19, 190, 370),
                    {{0.68, 0.41}, {0.32, 0.84}},
                    {{0.32, 0.84}, {0.7, 0.84}}};
        case 3:
            return {arc(0.44, 0.345, 0.17, 0.16, 230, 450), arc(0.44, 0.655, 0.18, 0.17, 270, 490)};
        case 4:
            return {{{0.6, 0.16}, {0.3, 0.6}}, {{0.3, 0.6}, {0.74, 0.6}}, {{0.62, 0.42}, {0.62, 0.84}}};
        case 5:
            return {{{0.66, 0.17}, {0.36, 0.17}},
                    {{0.36, 0.17}, {0.35, 0.46}},
                    arc(0.47, 0.62, 0.185, 0.18, 235, 480)};
        case 6:
            return {{{0.6, 0.15}, {0.45, 0.33}, {0.34, 0.52}, {0.3, 0.64}},
                    arc(0.48, 0.64, 0.175, 0.17, 0, 360, 28)};
        case 7:
            return {{{0.3, 0.17}, {0.7, 0.17}}, {{0.7, 0.17}, {0.42, 0.84}}};
        case 8:
            return {arc(0.5, 0.33, 0.155, 0.145, 0, 360, 28), arc(0.5, 0.655, 0.185, 0.175, 0, 360, 28)};
        case 9:
            return {arc(0.5, 0.36, 0.17, 0.165, 0, 360, 28),
                    {{0.67, 0.4}, {0.65, 0.58}, {0.6, 0.72}, {0.53, 0.85}}};
        default:
            throw std::invalid_argument("digit must be 0-9");
    }
}

double dist_to_segment(double px, double py, const Point& a, const Point& b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double wx = px - a.x, wy = py - a.y;
    double vv = vx * vx + vy * vy;
    double t = vv > 0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
    double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

struct Jitter {
    double rot, sx, sy, shear, tx, ty, width, gain;
};

Point transform(const Point& p, const Jitter& j) {
    double x = (p.x - 0.5) * j.sx, y = (p.y - 0.5) * j.sy;
    x += j.shear * y;
    double c = std::cos(j.rot), s = std::sin(j.rot);
    return {0.5 + c * x - s * y + j.tx, 0.5 + s * x + c * y + j.ty};
}

Tensor render(int digit, Rng& rng) {
    constexpr std::size_t kSide = 28;
    Jitter j{rng.uniform(-0.13, 0.13), rng.uniform(0.85, 1.1),  rng.uniform(0.85, 1.1),
             rng.uniform(-0.08, 0.08), rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
             rng.uniform(0.028, 0.044), rng.uniform(0.8, 1.0)};

    std::vector<Polyline> strokes;
    for (const Polyline& pl : glyph(digit)) {
        Polyline t;
        t.reserve(pl.size());
        for (const Point& p : pl) t.push_back(transform(p, j));
        strokes.push_back(std::move(t));
    }

    constexpr double kAntialias = 0.022;
    Tensor img({kSide, kSide});
    for (std::size_t r = 0; r < kSide; ++r) {
        for (std::size_t c = 0; c < kSide; ++c) {
            double px = (static_cast<double>(c) + 0.5) / kSide;
            double py = (static_cast<double>(r) + 0.5) / kSide;
            double best = 1e9;
            for (const Polyline& pl : strokes) {
                for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
                    best = std::min(best, dist_to_segment(px, py, pl[i], pl[i + 1]));
                }
            }
            double v = std::clamp(1.0 - (best - j.width) / kAntialias, 0.0, 1.0) * j.gain;
            v += rng.normal(0.0, 0.02);
            img.at2(r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
    // byte quantization, matching the IDX container exactly
    for (double& v : img.data) v = std::lround(v * 255.0) / 255.0;
    return img;
}

}  // namespace

LabeledDataset synth_digits(std::size_t per_class, std::uint64_t seed, const std::string& split) {
    LabeledDataset ds;
    ds.split = split;
    Rng rng(derive_seed(seed, "digits-" + split));
    // interleave classes so any prefix of the dataset stays class-balanced
    for (std::size_t i = 0; i < per_class; ++i) {
        for (int digit = 0; digit < 10; ++digit) {
            ds.samples.push_back(render(digit, rng));
            ds.labels.push_back(digit);
        }
    }
    return ds;
}

}  // namespace clad
