#include <cmath>
#include <numbers>

#include "alertmon/features.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

using namespace alertmon;

namespace {

EyeLandmarks hexagon_eye()
{
    return EyeLandmarks{{{{0, 0}, {1, 1}, {3, 1}, {4, 0}, {3, -1}, {1, -1}}}};
}

MouthLandmarks example_mouth()
{
    return MouthLandmarks{{0, 0}, {3, 0}, {1, 1}, {1, -1}, {1.5, 1.2}, {1.5, -1.2}, {2, 1}, {2, -1}};
}

FeatureVector raw(double ear, double mar, double puc, double moe)
{
    FeatureVector v;
    v.values = {ear, mar, puc, moe};
    return v;
}

Point2 rotate(Point2 p, double angle)
{
    return {p.x * std::cos(angle) - p.y * std::sin(angle), p.x * std::sin(angle) + p.y * std::cos(angle)};
}

} // namespace

TEST_CASE("EAR hand values")
{
    CHECK(compute_ear(hexagon_eye()) == doctest::Approx(0.5).epsilon(1e-12));

    EyeLandmarks closed = hexagon_eye();
    closed.p[5] = closed.p[1];
    closed.p[4] = closed.p[2];
    CHECK(compute_ear(closed) == 0.0);

    EyeLandmarks scaled = hexagon_eye();
    for (auto& p : scaled.p)
        p = {p.x * 3.0, p.y * 3.0};
    CHECK(compute_ear(scaled) == doctest::Approx(0.5).epsilon(1e-12));

    EyeLandmarks degenerate = hexagon_eye();
    degenerate.p[3] = degenerate.p[0];
    CHECK_ERROR_CODE(compute_ear(degenerate), ErrorCode::DegenerateGeometry);
}

TEST_CASE("MAR hand values")
{
    // (2 + 2.4 + 2) / 9
    CHECK(compute_mar(example_mouth()) == doctest::Approx(6.4 / 9.0).epsilon(1e-12));

    MouthLandmarks closed = example_mouth();
    closed.d = closed.c;
    closed.f = closed.e;
    closed.h = closed.g;
    CHECK(compute_mar(closed) == 0.0);

    MouthLandmarks rotated = example_mouth();
    const double angle = 37.0 * std::numbers::pi / 180.0;
    for (Point2* p : {&rotated.a, &rotated.b, &rotated.c, &rotated.d, &rotated.e, &rotated.f, &rotated.g, &rotated.h})
        *p = rotate(*p, angle);
    CHECK(compute_mar(rotated) == doctest::Approx(6.4 / 9.0).epsilon(1e-12));

    MouthLandmarks degenerate = example_mouth();
    degenerate.b = degenerate.a;
    CHECK_ERROR_CODE(compute_mar(degenerate), ErrorCode::DegenerateGeometry);
}

TEST_CASE("PUC hand values")
{
    // Area = 2*pi, perimeter = 4 + 4*sqrt(2).
    const double expected = std::numbers::pi * std::numbers::pi / (2.0 * std::pow(1.0 + std::sqrt(2.0), 2));
    CHECK(compute_puc(hexagon_eye()) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(compute_puc(hexagon_eye()) - 0.8466782) < 1e-7);

    for (double r : {0.5, 7.3, 120.0}) {
        EyeLandmarks regular;
        for (std::size_t k = 0; k < 6; ++k) {
            const double theta = std::numbers::pi - static_cast<double>(k) * std::numbers::pi / 3.0;
            regular.p[k] = {r * std::cos(theta) + 11.0, r * std::sin(theta) - 4.0};
        }
        CHECK(std::abs(compute_puc(regular) - std::numbers::pi * std::numbers::pi / 9.0) < 1e-9);
    }

    EyeLandmarks scaled = hexagon_eye();
    for (auto& p : scaled.p)
        p = {p.x * 10.0, p.y * 10.0};
    CHECK(compute_puc(scaled) == doctest::Approx(expected).epsilon(1e-12));

    EyeLandmarks point{};
    CHECK_ERROR_CODE(compute_puc(point), ErrorCode::DegenerateGeometry);
}

TEST_CASE("MOE")
{
    CHECK(compute_moe(0.25, 0.5) == 2.0);
    CHECK(compute_moe(0.25, 0.0) == 0.0);
    CHECK(compute_moe(0.28, 0.98) == doctest::Approx(3.5));
    CHECK_ERROR_CODE(compute_moe(0.0, 0.5), ErrorCode::DegenerateGeometry);
}

TEST_CASE("frame EAR averages both eyes")
{
    LandmarkFrame f;
    f.face_present = true;
    f.points = template_face(0.5, 0.3);
    CHECK(compute_frame_ear(f) == doctest::Approx(0.5).epsilon(1e-12));

    // Right eye at 0.3: halve its vertical extent relative to 0.5.
    const auto other = template_face(0.3, 0.3);
    for (std::size_t i = 42; i < 48; ++i)
        f.points[i] = other[i];
    CHECK(compute_frame_ear(f) == doctest::Approx(0.4).epsilon(1e-12));

    f.points[45] = f.points[42];
    CHECK_ERROR_CODE(compute_frame_ear(f), ErrorCode::DegenerateGeometry);
}

TEST_CASE("compute_features composition")
{
    LandmarkFrame f;
    f.face_present = true;
    f.points = template_face(0.3, 0.0);
    const FeatureVector v = compute_features(f);
    CHECK(v.ear() > 0.0);
    CHECK(v.mar() == 0.0);
    CHECK(v.puc() > 0.0);
    CHECK(v.moe() == 0.0);
    CHECK_FALSE(v.normalized);

    LandmarkFrame moved = f;
    for (auto& p : moved.points)
        p = {p.x + 50.0, p.y - 20.0};
    const FeatureVector w = compute_features(moved);
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        CHECK(testing::relative_error(v.values[i], w.values[i]) < 1e-12);

    LandmarkFrame absent;
    CHECK_ERROR_CODE(compute_features(absent), ErrorCode::FaceNotPresent);
    CHECK_FALSE(try_compute_features(absent).has_value());
}

TEST_CASE("compute_features matches the direct-evaluation oracle")
{
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        const LandmarkFrame f = testing::random_face_frame(rng, 3.0);
        const FeatureVector v = compute_features(f);
        const auto o = oracle::features(f.points);
        CHECK(testing::relative_error(v.ear(), o.ear) < 1e-9);
        CHECK(testing::relative_error(v.mar(), o.mar) < 1e-9);
        CHECK(testing::relative_error(v.puc(), o.puc) < 1e-9);
        CHECK(testing::relative_error(v.moe(), o.moe) < 1e-9);
        CHECK(v.moe() == v.mar() / v.ear());
    }
}

TEST_CASE("raw features are similarity invariant")
{
    Rng rng(99);
    for (int i = 0; i < 50; ++i) {
        const LandmarkFrame f = testing::random_face_frame(rng);
        const FeatureVector v = compute_features(f);
        const double scale = 0.2 + 5.0 * rng.uniform();
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        const Point2 shift{rng.uniform() * 400.0 - 200.0, rng.uniform() * 400.0 - 200.0};
        LandmarkFrame g = f;
        for (auto& p : g.points) {
            const Point2 r = rotate(p, angle);
            p = {scale * r.x + shift.x, scale * r.y + shift.y};
        }
        const FeatureVector w = compute_features(g);
        for (std::size_t k = 0; k < kFeatureCount; ++k)
            CHECK(testing::relative_error(v.values[k], w.values[k]) < 1e-9);
    }
}

TEST_CASE("fit_baseline")
{
    const std::vector<FeatureVector> same(30, raw(0.3, 0.5, 0.4, 0.5 / 0.3));
    const BaselineStats b = fit_baseline(same, "s1");
    CHECK(b.subject_id == "s1");
    CHECK(b.n_frames == 30);
    CHECK(b.mean[0] == doctest::Approx(0.3));
    for (double s : b.std)
        CHECK(s == doctest::Approx(0.0).epsilon(1e-15));

    std::vector<FeatureVector> alternating;
    for (int i = 0; i < 30; ++i)
        alternating.push_back(raw(i % 2 ? 0.4 : 0.2, 1.0, 1.0, 1.0));
    const BaselineStats a = fit_baseline(alternating, "s2");
    CHECK(a.mean[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(a.std[0] == doctest::Approx(0.1).epsilon(1e-12));

    const std::vector<FeatureVector> twelve(12, raw(0.3, 0.5, 0.4, 1.0));
    CHECK_ERROR_CODE(fit_baseline(twelve, "s3"), ErrorCode::InsufficientBaseline);

    // Shortfall between the minimum and 30 uses every available frame.
    const std::vector<FeatureVector> twenty(20, raw(0.3, 0.5, 0.4, 1.0));
    CHECK(fit_baseline(twenty, "s4").n_frames == 20);

    // Only the first 30 frames count.
    std::vector<FeatureVector> long_run(30, raw(0.3, 0.5, 0.4, 1.0));
    long_run.push_back(raw(9.0, 9.0, 9.0, 9.0));
    CHECK(fit_baseline(long_run, "s5").mean[0] == doctest::Approx(0.3));
}

TEST_CASE("normalize")
{
    BaselineStats b;
    b.mean = {0.3, 0.5, 0.4, 1.5};
    b.std = {0.05, 0.1, 0.02, 0.3};
    b.n_frames = 30;

    const FeatureVector at_mean = normalize(raw(0.3, 0.5, 0.4, 1.5), b);
    CHECK(at_mean.normalized);
    for (double x : at_mean.values)
        CHECK(x == doctest::Approx(0.0));

    CHECK(normalize(raw(0.3 + 2 * 0.05, 0.5, 0.4, 1.5), b).ear() == doctest::Approx(2.0).epsilon(1e-12));

    BaselineStats flat = b;
    flat.std[0] = 0.0;
    const FeatureVector z = normalize(raw(0.4, 0.5, 0.4, 1.5), flat);
    CHECK(z.ear() == doctest::Approx(1e5).epsilon(1e-9));
    CHECK(z.zero_std[0]);
    CHECK_FALSE(z.zero_std[1]);

    CHECK_ERROR_CODE(normalize(at_mean, b), ErrorCode::AlreadyNormalized);
}

TEST_CASE("normalize inverts through denormalize")
{
    Rng rng(5);
    BaselineStats b;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        b.mean[f] = rng.uniform();
        b.std[f] = 0.01 + rng.uniform();
    }
    for (int i = 0; i < 100; ++i) {
        const FeatureVector v = raw(rng.uniform(), rng.uniform(), rng.uniform(), 5.0 * rng.uniform());
        const FeatureVector back = denormalize(normalize(v, b), b);
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            CHECK(testing::relative_error(back.values[f], v.values[f]) < 1e-12);
    }
}

TEST_CASE("feature masks")
{
    const auto& masks = all_feature_masks();
    std::vector<std::string> labels;
    for (auto m : masks)
        labels.push_back(m.label());
    const std::vector<std::string> expected{"EAR",         "MAR",         "PUC",         "MOE",
                                            "EAR+MAR",     "EAR+PUC",     "EAR+MOE",     "MAR+PUC",
                                            "MAR+MOE",     "PUC+MOE",     "EAR+MAR+PUC", "EAR+MAR+MOE",
                                            "EAR+PUC+MOE", "MAR+PUC+MOE", "EAR+MAR+PUC+MOE"};
    CHECK(labels == expected);

    CHECK(FeatureMask::parse("mar,MOE") == FeatureMask({Feature::Mar, Feature::Moe}));
    CHECK(FeatureMask::parse("EAR+MAR+PUC+MOE") == FeatureMask::all());
    CHECK_ERROR_CODE(FeatureMask::parse("EAR,XYZ"), ErrorCode::InvalidConfig);
    CHECK_ERROR_CODE(FeatureMask::parse(""), ErrorCode::InvalidConfig);

    const FeatureVector v = raw(1, 2, 3, 4);
    CHECK(FeatureMask({Feature::Moe, Feature::Ear}).project(v) == std::vector<double>{1, 4});
}
