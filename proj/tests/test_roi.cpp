#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "respiscreen/roi.hpp"
#include "respiscreen/synth.hpp"

using namespace respiscreen;

namespace {

CelsiusFrame flat_frame(uint32_t w, uint32_t h, double value) {
    CelsiusFrame f;
    f.width = w;
    f.height = h;
    f.temps.assign(static_cast<size_t>(w) * h, value);
    return f;
}

void paint(CelsiusFrame& f, const Rect& r, double value) {
    for (int y = r.y; y < r.bottom(); ++y)
        for (int x = r.x; x < r.right(); ++x)
            f.at(static_cast<uint32_t>(x), static_cast<uint32_t>(y)) = value;
}

// bounding box of the scenario's face ellipse, enumerated independently
Rect ellipse_bbox(const Scenario& s) {
    int minx = 1 << 30, miny = 1 << 30, maxx = -1, maxy = -1;
    for (int y = 0; y < static_cast<int>(s.height); ++y) {
        for (int x = 0; x < static_cast<int>(s.width); ++x) {
            const double ex = (x - s.face_center_x) / s.face_axis_x;
            const double ey = (y - s.face_center_y) / s.face_axis_y;
            if (ex * ex + ey * ey <= 1.0) {
                minx = std::min(minx, x);
                maxx = std::max(maxx, x);
                miny = std::min(miny, y);
                maxy = std::max(maxy, y);
            }
        }
    }
    return Rect{minx, miny, maxx - minx + 1, maxy - miny + 1};
}

}  // namespace

TEST_CASE("detect_face matches the phantom ellipse bounding box") {
    Scenario s;
    const RenderResult r = render(s);
    const Rect face = detect_face(calibrate(r.clip.frames[0], r.clip.calibration));
    CHECK(iou(face, ellipse_bbox(s)) >= 0.8);
}

TEST_CASE("detect_face refuses a uniform frame") {
    CHECK_THROWS_AS(detect_face(flat_frame(64, 48, 24.0)), NoFaceFound);
}

TEST_CASE("detect_face picks the largest warm blob") {
    CelsiusFrame f = flat_frame(100, 100, 24.0);
    paint(f, Rect{10, 10, 40, 25}, 34.0);  // 10% of the frame
    paint(f, Rect{70, 70, 20, 15}, 35.0);  // 3%
    const Rect face = detect_face(f);
    CHECK(face == Rect{10, 10, 40, 25});
}

TEST_CASE("detect_face enforces the 2% area floor") {
    CelsiusFrame f = flat_frame(100, 100, 24.0);
    paint(f, Rect{50, 50, 10, 10}, 34.0);  // 1%
    CHECK_THROWS_AS(detect_face(f), NoFaceFound);
}

TEST_CASE("detect_forehead locks onto the phantom hot patch") {
    Scenario s;
    const RenderResult r = render(s);
    const CelsiusFrame f = calibrate(r.clip.frames[0], r.clip.calibration);
    const Rect face = detect_face(f);
    const Rect fore = detect_forehead(f, face);
    CHECK(iou(fore, r.truth.forehead_rects[0]) >= 0.5);
}

TEST_CASE("detect_forehead tie-breaks leftmost-topmost on a uniform face") {
    CelsiusFrame f = flat_frame(60, 60, 30.0);
    const Rect face{10, 12, 30, 24};
    const Rect fore = detect_forehead(f, face);
    CHECK(fore == Rect{10, 12, 15, 4});
}

TEST_CASE("detect_forehead rejects a face box under 6 px tall") {
    const CelsiusFrame f = flat_frame(60, 60, 30.0);
    CHECK_THROWS_AS(detect_forehead(f, Rect{10, 10, 30, 5}), std::invalid_argument);
}

TEST_CASE("detect_nostril finds the breathing patch on the phantom") {
    Scenario s;
    s.breath_rate_bpm = 18.0;
    const RenderResult r = render(s);
    const auto frames = calibrate_all(r.clip);
    const Rect face = detect_face(frames[0]);
    const Rect nose = detect_nostril(frames, s.fps, face);
    CHECK(iou(nose, r.truth.nostril_rects[0]) >= 0.5);
}

TEST_CASE("detect_nostril reports NoBreathingRegion when nothing breathes") {
    Scenario s;
    s.breath_amplitude_c = 0.0;
    const RenderResult r = render(s);
    const auto frames = calibrate_all(r.clip);
    const Rect face = detect_face(frames[0]);
    CHECK_THROWS_AS(detect_nostril(frames, s.fps, face), NoBreathingRegion);
}

TEST_CASE("detect_nostril searches only the bottom half of the face") {
    // oscillating patch in the TOP half of a warm square face
    std::vector<CelsiusFrame> frames;
    const Rect face{20, 20, 60, 60};
    for (int i = 0; i < 60; ++i) {
        CelsiusFrame f = flat_frame(100, 100, 24.0);
        paint(f, face, 34.0);
        const double w = std::sin(2.0 * std::numbers::pi * 0.25 * i / 8.7);
        paint(f, Rect{40, 25, 20, 10}, 33.0 + 0.5 * w);
        frames.push_back(std::move(f));
    }
    CHECK_THROWS_AS(detect_nostril(frames, 8.7, face), NoBreathingRegion);
}

TEST_CASE("detect_nostril is invariant to a global constant offset") {
    Scenario s;
    const RenderResult r = render(s);
    auto frames = calibrate_all(r.clip);
    const Rect face = detect_face(frames[0]);
    const Rect a = detect_nostril(frames, s.fps, face);
    for (CelsiusFrame& f : frames)
        for (double& v : f.temps) v += 7.5;
    const Rect b = detect_nostril(frames, s.fps, face);
    CHECK(a == b);
}

TEST_CASE("detect_nostril requires a probe-length clip") {
    Scenario s;
    const RenderResult r = render(s);
    auto frames = calibrate_all(r.clip);
    frames.resize(10);  // ~1.1 s, probe needs 5 s
    const Rect face = detect_face(frames[0]);
    CHECK_THROWS_AS(detect_nostril(frames, s.fps, face, 5.0), std::invalid_argument);
}

TEST_CASE("track on a truly static scene returns the initial rect with quality 1") {
    Scenario s;
    s.breath_amplitude_c = 0.0;
    const RenderResult r = render(s);
    const auto frames = calibrate_all(r.clip);
    const RoiTrack tk = track(frames, r.truth.nostril_rects[0], RoiRegion::Nostril, 8);
    for (size_t i = 0; i < tk.rects.size(); ++i) {
        CHECK(tk.rects[i] == r.truth.nostril_rects[0]);
        CHECK(tk.quality[i] == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("track follows 2 px sway within 1 px of ground truth") {
    Scenario s;
    s.sway_amplitude_px = 2.0;
    const RenderResult r = render(s);
    const auto frames = calibrate_all(r.clip);
    const RoiTrack tk = track(frames, r.truth.nostril_rects[0], RoiRegion::Nostril, 8);
    for (size_t i = 0; i < tk.rects.size(); ++i) {
        CHECK(std::abs(tk.rects[i].center_x() - r.truth.nostril_rects[i].center_x()) <= 1.0);
        CHECK(std::abs(tk.rects[i].center_y() - r.truth.nostril_rects[i].center_y()) <= 1.0);
    }
}

TEST_CASE("track is translation-equivariant") {
    // blob with internal structure wiggling around the frame center
    auto make_frames = [](int shift_x, int shift_y) {
        std::vector<CelsiusFrame> frames;
        for (int i = 0; i < 12; ++i) {
            CelsiusFrame f = flat_frame(80, 60, 20.0);
            const int wiggle = i % 3 - 1;
            const Rect blob{30 + wiggle + shift_x, 25 + shift_y, 14, 10};
            for (int y = blob.y; y < blob.bottom(); ++y)
                for (int x = blob.x; x < blob.right(); ++x)
                    f.at(static_cast<uint32_t>(x), static_cast<uint32_t>(y)) =
                        30.0 + 0.3 * (x - blob.x) + 0.2 * (y - blob.y);
            frames.push_back(std::move(f));
        }
        return frames;
    };
    const RoiTrack base = track(make_frames(0, 0), Rect{30, 25, 14, 10}, RoiRegion::Nostril, 8);
    const RoiTrack shifted = track(make_frames(4, 3), Rect{34, 28, 14, 10}, RoiRegion::Nostril, 8);
    REQUIRE(base.rects.size() == shifted.rects.size());
    for (size_t i = 0; i < base.rects.size(); ++i) {
        CHECK(shifted.rects[i].x == base.rects[i].x + 4);
        CHECK(shifted.rects[i].y == base.rects[i].y + 3);
    }
}

TEST_CASE("track coasts when the target teleports past the search radius") {
    std::vector<CelsiusFrame> frames;
    for (int i = 0; i < 10; ++i) {
        CelsiusFrame f = flat_frame(80, 60, 20.0);
        const Rect blob = i < 3 ? Rect{10, 10, 10, 8} : Rect{50, 40, 10, 8};
        for (int y = blob.y; y < blob.bottom(); ++y)
            for (int x = blob.x; x < blob.right(); ++x)
                f.at(static_cast<uint32_t>(x), static_cast<uint32_t>(y)) =
                    31.0 + 0.4 * (x - blob.x);
        frames.push_back(std::move(f));
    }
    const RoiTrack tk = track(frames, Rect{10, 10, 10, 8}, RoiRegion::Nostril, 8);
    for (size_t i = 3; i < tk.rects.size(); ++i) {
        CHECK(tk.rects[i] == Rect{10, 10, 10, 8});  // coasting holds the last good rect
        CHECK(tk.quality[i] < kCoastQuality);
    }
}

TEST_CASE("track keeps every emitted rect inside the frame") {
    // blob marching off the right edge
    std::vector<CelsiusFrame> frames;
    for (int i = 0; i < 15; ++i) {
        CelsiusFrame f = flat_frame(60, 40, 20.0);
        const int bx = std::min(44, 30 + 2 * i);
        for (int y = 15; y < 25; ++y)
            for (int x = bx; x < std::min(60, bx + 12); ++x)
                f.at(static_cast<uint32_t>(x), static_cast<uint32_t>(y)) =
                    30.0 + 0.3 * (x - bx) + 0.1 * y;
        frames.push_back(std::move(f));
    }
    const RoiTrack tk = track(frames, Rect{30, 15, 12, 10}, RoiRegion::Nostril, 8);
    for (const Rect& r : tk.rects) CHECK(r.within(60, 40));
}
