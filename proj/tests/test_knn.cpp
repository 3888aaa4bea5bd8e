#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

namespace pm = propmat;

namespace {

// Left block Foreground, right block Background, unknown band between.
pm::Trimap split_trimap(int w, int h, int fg_cols, int bg_cols) {
    pm::Trimap tri(w, h, pm::Label::Unknown);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < fg_cols; ++x) tri.at(x, y) = pm::Label::Foreground;
        for (int x = w - bg_cols; x < w; ++x) tri.at(x, y) = pm::Label::Background;
    }
    return tri;
}

pm::FeatureSpaces spaces_for(const pm::RgbImage& img) { return pm::build_feature_spaces(img); }

std::vector<double> random_vec(std::mt19937_64& rng, double lo, double hi, std::size_t n = 9) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST(BoundarySamples, FilledSquareGivesItsPerimeter) {
    pm::Trimap tri(11, 11, pm::Label::Unknown);
    for (int y = 3; y < 8; ++y)
        for (int x = 3; x < 8; ++x) tri.at(x, y) = pm::Label::Foreground;
    tri.at(0, 0) = pm::Label::Background;
    const pm::FeatureField f(11, 11, 9);
    const auto set = pm::collect_boundary_samples(f, tri);
    EXPECT_EQ(set.count(pm::ClassLabel::Foreground), 16u);
    for (const auto& s : set.samples) {
        if (s.label != pm::ClassLabel::Foreground) continue;
        const bool on_edge = s.position.x == 3 || s.position.x == 7 || s.position.y == 3 || s.position.y == 7;
        EXPECT_TRUE(on_edge);
    }
}

TEST(BoundarySamples, IsolatedPixelIsASample) {
    pm::Trimap tri(5, 5, pm::Label::Unknown);
    tri.at(2, 2) = pm::Label::Foreground;
    tri.at(4, 4) = pm::Label::Background;
    const auto set = pm::collect_boundary_samples(pm::FeatureField(5, 5, 9), tri);
    ASSERT_EQ(set.samples.size(), 2u);
    EXPECT_EQ(set.samples[0].position, (pm::PixelPos{2, 2}));
    EXPECT_EQ(set.samples[0].label, pm::ClassLabel::Foreground);
}

TEST(BoundarySamples, MissingClassIsUnusable) {
    EXPECT_THROW(pm::collect_boundary_samples(pm::FeatureField(4, 4, 9), pm::Trimap(4, 4, pm::Label::Foreground)),
                 pm::UnusableTrimapError);
    pm::Trimap no_fg(4, 4, pm::Label::Unknown);
    no_fg[3] = pm::Label::Background;
    EXPECT_THROW(pm::collect_boundary_samples(pm::FeatureField(4, 4, 9), no_fg), pm::UnusableTrimapError);
}

TEST(Train, SeparableColorsScorePerfectlyAndPickSmallestK) {
    pm::RgbImage img(20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x)
            pm::testing::set_rgb(img, x, y, x < 10 ? pm::Rgb{1, 0, 0} : pm::Rgb{0, 0, 1});
    const auto tri = split_trimap(20, 20, 8, 8);
    const auto spaces = spaces_for(img);
    const auto clf = pm::train(spaces.color_texture, spaces.with_coords, tri, {});
    EXPECT_FALSE(clf.used_coords());
    EXPECT_EQ(clf.k(), 1);
    EXPECT_EQ(clf.cv_accuracy(), 1.0);
    ASSERT_EQ(clf.score_table().size(), 8u);
    for (const auto& s : clf.score_table()) EXPECT_EQ(s.accuracy, 1.0);
}

TEST(Train, IdenticalColorsSwitchToCoordinates) {
    const auto img = pm::testing::constant_image(20, 20, 0.5, 0.3, 0.2);
    const auto tri = split_trimap(20, 20, 8, 8);
    const auto spaces = spaces_for(img);

    pm::TrainOptions force9;
    force9.policy = pm::FeaturePolicy::Force9;
    const auto nine = pm::train(spaces.color_texture, spaces.with_coords, tri, force9);
    EXPECT_NEAR(nine.cv_accuracy(), 0.5, 1e-12);

    const auto clf = pm::train(spaces.color_texture, spaces.with_coords, tri, {});
    EXPECT_TRUE(clf.used_coords());
    EXPECT_EQ(clf.dimensionality(), 11u);
    EXPECT_EQ(clf.cv_accuracy(), 1.0);
}

TEST(Train, HighNineDimensionalAccuracyKeepsNineDimensions) {
    const auto img = pm::testing::constant_image(20, 20, 0.5, 0.3, 0.2);
    const auto tri = split_trimap(20, 20, 8, 8);
    const auto spaces = spaces_for(img);
    pm::TrainOptions opt;
    opt.accuracy_floor = 0.4;  // chance level already clears the floor
    EXPECT_FALSE(pm::train(spaces.color_texture, spaces.with_coords, tri, opt).used_coords());
    opt.policy = pm::FeaturePolicy::Force11;
    EXPECT_TRUE(pm::train(spaces.color_texture, spaces.with_coords, tri, opt).used_coords());
}

TEST(Train, TooFewSamplesIsDegenerate) {
    const auto img = pm::testing::constant_image(12, 5, 0.5, 0.5, 0.5);
    // A single column of 5 boundary pixels per class.
    const auto tri = split_trimap(12, 5, 1, 1);
    const auto spaces = spaces_for(img);
    EXPECT_THROW(pm::train(spaces.color_texture, spaces.with_coords, tri, {}), pm::DegenerateSampleSetError);
}

TEST(Train, SelectedKHasTheBestScore) {
    std::mt19937_64 rng(7);
    std::vector<std::vector<double>> fg, bg;
    for (int i = 0; i < 40; ++i) {
        fg.push_back(random_vec(rng, 0.0, 10.0));
        bg.push_back(random_vec(rng, 4.0, 14.0));
    }
    const auto set = pm::testing::make_samples(fg, bg);
    const auto clf = pm::train_on(set, {}, false);
    for (const auto& s : clf.score_table()) {
        EXPECT_GE(clf.cv_accuracy(), s.accuracy);
        if (s.k < clf.k()) {
            EXPECT_LT(s.accuracy, clf.cv_accuracy());
        }
    }
}

TEST(CrossValidate, SeparableSetIsPerfectForEveryOddK) {
    std::mt19937_64 rng(17);
    std::vector<std::vector<double>> fg, bg;
    for (int i = 0; i < 50; ++i) {
        fg.push_back(random_vec(rng, 0.0, 1.0));
        bg.push_back(random_vec(rng, 5.0, 6.0));
    }
    for (const auto& s : pm::cross_validate(pm::testing::make_samples(fg, bg), 5, 15)) {
        EXPECT_EQ(s.accuracy, 1.0) << "k=" << s.k;
    }
}

TEST(Classify, ExactSampleMatchHasZeroDistance) {
    std::mt19937_64 rng(1);
    std::vector<std::vector<double>> fg, bg;
    for (int i = 0; i < 5; ++i) {
        fg.push_back(random_vec(rng, 0, 1));
        bg.push_back(random_vec(rng, 0, 1));
    }
    const pm::TrainedClassifier clf(pm::testing::make_samples(fg, bg), 1, 1.0, false);
    const auto c = clf.classify(pm::FeatureVector(fg[3]));
    EXPECT_EQ(c.dist_f, 0.0);
    EXPECT_EQ(c.flag, pm::ClassLabel::Foreground);
    EXPECT_EQ(c.nearest_f, 3u);
}

TEST(Classify, EquidistantTieGoesToBackground) {
    std::vector<double> a(9, 0.0), b(9, 0.0);
    a[0] = 1.0;
    b[0] = -1.0;
    const pm::TrainedClassifier clf(pm::testing::make_samples({a}, {b}), 1, 1.0, false);
    const auto c = clf.classify(pm::FeatureVector(std::vector<double>(9, 0.0)));
    EXPECT_EQ(c.dist_f, c.dist_b);
    EXPECT_EQ(c.flag, pm::ClassLabel::Background);
}

TEST(Classify, MatchesFullSortBruteForce) {
    std::mt19937_64 rng(2024);
    std::vector<std::vector<double>> fg, bg;
    for (int i = 0; i < 50; ++i) {
        fg.push_back(random_vec(rng, 0.0, 100.0));
        bg.push_back(random_vec(rng, 10.0, 110.0));
    }
    const auto set = pm::testing::make_samples(fg, bg);
    for (int k : {1, 5, 15}) {
        const pm::TrainedClassifier clf(set, k, 1.0, false);
        for (int q = 0; q < 200; ++q) {
            const pm::FeatureVector x(random_vec(rng, 0.0, 110.0));
            const auto got = clf.classify(x);
            const auto want = pm::testing::brute_force_knn(set, x, k);
            ASSERT_EQ(got.flag, want.flag);
            ASSERT_EQ(got.dist_f, want.dist_f);
            ASSERT_EQ(got.dist_b, want.dist_b);
        }
    }
}

TEST(Classify, PermutationAndDuplicateInvariance) {
    std::mt19937_64 rng(8);
    std::vector<std::vector<double>> fg, bg;
    for (int i = 0; i < 30; ++i) {
        fg.push_back(random_vec(rng, 0.0, 10.0));
        bg.push_back(random_vec(rng, 3.0, 13.0));
    }
    auto set = pm::testing::make_samples(fg, bg);
    auto shuffled = set;
    std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
    auto duplicated = set;
    duplicated.samples.push_back(set.samples[4]);
    duplicated.samples.push_back(set.samples[40]);

    const pm::TrainedClassifier base(set, 1, 1.0, false);
    const pm::TrainedClassifier perm(shuffled, 1, 1.0, false);
    const pm::TrainedClassifier dup(duplicated, 1, 1.0, false);
    const pm::TrainedClassifier perm5(shuffled, 5, 1.0, false);
    const pm::TrainedClassifier base5(set, 5, 1.0, false);
    for (int q = 0; q < 300; ++q) {
        const pm::FeatureVector x(random_vec(rng, 0.0, 13.0));
        const auto c = base.classify(x);
        EXPECT_EQ(c.flag, perm.classify(x).flag);
        EXPECT_EQ(c.flag, dup.classify(x).flag);
        EXPECT_EQ(base5.classify(x).dist_f, perm5.classify(x).dist_f);

        // k = 1 is plain nearest neighbor.
        double best = 1e300;
        pm::ClassLabel label = pm::ClassLabel::Background;
        for (const auto& s : set.samples) {
            const double d = pm::feature_distance(s.feature, x);
            if (d < best || (d == best && s.label == pm::ClassLabel::Background)) {
                best = d;
                label = s.label;
            }
        }
        EXPECT_EQ(c.flag, label);
    }
}

TEST(Classify, DimensionMismatchThrows) {
    std::mt19937_64 rng(3);
    const pm::TrainedClassifier clf(pm::testing::make_samples({random_vec(rng, 0, 1)}, {random_vec(rng, 0, 1)}),
                                    1, 1.0, false);
    EXPECT_THROW(clf.classify(pm::FeatureVector(random_vec(rng, 0, 1, 11))), pm::DimensionError);
}
