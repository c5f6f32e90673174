#include <algorithm>
#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles/fixtures.hpp"
#include "oracles/oracles.hpp"
#include "rcc/clustering/hac.hpp"
#include "rcc/clustering/kmeans.hpp"
#include "rcc/clustering/selection.hpp"
#include "rcc/random.hpp"

using namespace rcc;
using fixture::column;

namespace {

template <class F>
Errc error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an rcc::Error";
    return Errc::StageFailure;
}

Matrix random_points(Rng& rng, int n, int d, double spread) {
    Matrix x(n, d);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c) x(i, c) = rng.uniform(0.0, spread);
    return x;
}

}  // namespace

// ---- knee -----------------------------------------------------------------

TEST(Knee, HandExample) {
    const KneeInput c{{1, 2, 3, 4, 5, 6}, {100, 40, 15, 12, 11, 10}};
    EXPECT_EQ(knee_point(c), 2u);
    EXPECT_EQ(oracle::knee(c.xs, c.ys), 2u);
}

TEST(Knee, LinearCurveTiesToFirstIndex) {
    EXPECT_EQ(knee_point({{0, 1, 2, 3, 4}, {8, 6, 4, 2, 0}}), 0u);
    EXPECT_EQ(knee_point({{0, 1, 2, 3, 4}, {0, 0.1, 0.2, 0.3, 0.4}}), 0u);
}

TEST(Knee, Errors) {
    EXPECT_EQ(error_code([] { knee_point({{1, 2, 3}, {5, 5, 5}}); }), Errc::ConstantCurve);
    EXPECT_EQ(error_code([] { knee_point({{1, 2}, {1, 2}}); }), Errc::InvalidArgument);
    EXPECT_EQ(error_code([] { knee_point({{1, 1, 2}, {1, 2, 3}}); }), Errc::InvalidArgument);
}

TEST(Knee, MatchesOracleOnRandomCurves) {
    Rng rng(99);
    for (int t = 0; t < 100; ++t) {
        const int n = 3 + static_cast<int>(rng.below(30));
        KneeInput c;
        double x = 0, y = 0;
        for (int i = 0; i < n; ++i) {
            x += rng.uniform(0.1, 2.0);
            y += rng.uniform(-1.0, 1.0);
            c.xs.push_back(x);
            c.ys.push_back(y);
        }
        if (*std::max_element(c.ys.begin(), c.ys.end()) == *std::min_element(c.ys.begin(), c.ys.end())) continue;
        EXPECT_EQ(knee_point(c), oracle::knee(c.xs, c.ys)) << "trial " << t;
    }
}

TEST(Knee, SmoothingFlattensSpike) {
    // A single spike at index 1 is the raw knee; window 3 smooths it away.
    const KneeInput c{{0, 1, 2, 3, 4, 5, 6}, {10, 0, 9, 8, 7, 6, 5}};
    EXPECT_EQ(knee_point(c), 1u);
    EXPECT_NE(knee_point(c, 3), 1u);
}

// ---- kmeans ---------------------------------------------------------------

TEST(KMeans, FourPointExample) {
    const auto r = kmeans(column({0, 1, 10, 11}), 2, 42);
    EXPECT_DOUBLE_EQ(r.ssd, 1.0);
    EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 1, 1}));
    std::vector<double> centers{r.centers(0, 0), r.centers(1, 0)};
    std::sort(centers.begin(), centers.end());
    EXPECT_DOUBLE_EQ(centers[0], 0.5);
    EXPECT_DOUBLE_EQ(centers[1], 10.5);
    EXPECT_DOUBLE_EQ(oracle::exhaustive_kmeans_ssd(column({0, 1, 10, 11}), 2), 1.0);
}

TEST(KMeans, DegenerateK) {
    const Matrix x = column({3, 5, 10});
    const auto one = kmeans(x, 1, 1);
    EXPECT_DOUBLE_EQ(one.centers(0, 0), 6.0);
    EXPECT_EQ(one.labels, (std::vector<int>{0, 0, 0}));
    EXPECT_DOUBLE_EQ(kmeans(x, 3, 1).ssd, 0.0);
    EXPECT_EQ(error_code([&] { kmeans(x, 4, 1); }), Errc::KTooLarge);
    EXPECT_EQ(error_code([&] { kmeans(column({1, 1, 1, 2}), 3, 1); }), Errc::KTooLarge);
    EXPECT_EQ(error_code([&] { kmeans(x, 0, 1); }), Errc::InvalidArgument);
}

TEST(KMeans, DeterministicForSeed) {
    const auto b = fixture::gaussian_blobs({20, 20, 20}, 3, 1.0, 6.0, 5);
    const auto r1 = kmeans(b.points, 4, 77);
    const auto r2 = kmeans(b.points, 4, 77);
    EXPECT_EQ(r1.labels, r2.labels);
    EXPECT_EQ(r1.ssd, r2.ssd);
}

TEST(KMeans, NeverBeatsAndUsuallyReachesExhaustiveOptimum) {
    // Lloyd is a local method, so restarts make the optimum likely but not certain.
    Rng rng(2024);
    int hits = 0;
    const int trials = 60;
    for (int t = 0; t < trials; ++t) {
        const int n = 4 + static_cast<int>(rng.below(5));
        const int k = 2 + static_cast<int>(rng.below(2));
        const Matrix x = random_points(rng, n, 2, 10.0);
        const double best = oracle::exhaustive_kmeans_ssd(x, k);
        const double got = kmeans(x, k, rng.next_u64()).ssd;
        EXPECT_GE(got, best - 1e-9 * (1 + best)) << "trial " << t;
        hits += got <= best + 1e-9 * (1 + best);
    }
    EXPECT_GE(hits, trials * 9 / 10);
}

TEST(KMeans, SsdMatchesLabelsAndCenters) {
    const auto b = fixture::gaussian_blobs({15, 25, 10}, 4, 1.0, 5.0, 12);
    const auto r = kmeans(b.points, 3, 9);
    double ssd = 0.0;
    for (Eigen::Index i = 0; i < b.points.rows(); ++i) {
        const auto l = r.labels[static_cast<std::size_t>(i)];
        ssd += (b.points.row(i) - r.centers.row(l)).squaredNorm();
        for (Eigen::Index c = 0; c < r.centers.rows(); ++c)
            EXPECT_LE((b.points.row(i) - r.centers.row(l)).squaredNorm(),
                      (b.points.row(i) - r.centers.row(c)).squaredNorm() + 1e-9);
    }
    EXPECT_NEAR(ssd, r.ssd, 1e-9 * ssd);
}

TEST(SelectK, RecoversBlobCount) {
    const auto b = fixture::gaussian_blobs({40, 40, 40, 40, 40, 40}, 6, 1.0, 15.0, 11);
    const auto r = select_k_curve(b.points, {2, 12}, 3);
    EXPECT_EQ(r.k, 6);
    std::vector<double> xs(r.ks.begin(), r.ks.end());
    EXPECT_EQ(r.ks[oracle::knee(xs, r.ssds)], r.k);
}

TEST(SelectK, TooFewDistinctPoints) {
    EXPECT_EQ(error_code([] { select_k(column({1, 1, 2, 2, 3, 3, 4, 4}), {5, 8}, 1); }), Errc::KTooLarge);
}

// ---- dbscan ---------------------------------------------------------------

TEST(Dbscan, TwoClustersAndNoise) {
    const auto a = dbscan(column({0, 0.5, 1, 10, 10.5, 11}), {1.0, 3});
    EXPECT_EQ(a, (std::vector<int>{0, 0, 0, 1, 1, 1}));
    const auto b = dbscan(column({0, 0.5, 1, 10, 10.5, 11, 5}), {1.0, 3});
    EXPECT_EQ(b, (std::vector<int>{0, 0, 0, 1, 1, 1, kNoise}));
}

TEST(Dbscan, HugeEpsIsOneCluster) {
    const auto a = dbscan(column({0, 7, -3, 100}), {1e6, 2});
    EXPECT_EQ(a, (std::vector<int>{0, 0, 0, 0}));
}

TEST(Dbscan, ClosedBallAndSelfCount) {
    // Distance exactly eps counts; two points at distance 1 with min_pts 2 form a cluster.
    EXPECT_EQ(dbscan(column({0, 1}), {1.0, 2}), (std::vector<int>{0, 0}));
    EXPECT_EQ(dbscan(column({0, 1}), {0.999, 2}), (std::vector<int>{kNoise, kNoise}));
}

TEST(Dbscan, BorderJoinsLowestIndexCore) {
    // Point 2 (x=5) is a border of both the left core (x=4) and the right core (x=6).
    const Matrix x = column({3, 4, 5, 6, 7});
    const auto l = dbscan(x, {1.0, 3});
    EXPECT_EQ(l[2], l[1]);
    EXPECT_EQ(l, oracle::dbscan(x, 1.0, 3));
}

TEST(Dbscan, InvalidParams) {
    EXPECT_EQ(error_code([] { dbscan(column({0, 1}), {0.0, 3}); }), Errc::InvalidArgument);
    EXPECT_EQ(error_code([] { dbscan(column({0, 1}), {1.0, 1}); }), Errc::InvalidArgument);
}

TEST(Dbscan, MatchesNaiveOracle) {
    Rng rng(31337);
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng.below(60));
        const int d = 1 + static_cast<int>(rng.below(5));
        const Matrix x = random_points(rng, n, d, 10.0);
        const double eps = rng.uniform(0.3, 4.0);
        const int min_pts = 2 + static_cast<int>(rng.below(6));
        EXPECT_EQ(oracle::canon(dbscan(x, {eps, min_pts})), oracle::dbscan(x, eps, min_pts)) << "trial " << t;
    }
}

TEST(Dbscan, PermutationInvariant) {
    Rng rng(8);
    for (int t = 0; t < 30; ++t) {
        const int n = 10 + static_cast<int>(rng.below(40));
        const Matrix x = random_points(rng, n, 2, 10.0);
        const DbscanParams p{rng.uniform(0.5, 3.0), 3};
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm.begin(), perm.end());
        Matrix y(n, 2);
        for (int i = 0; i < n; ++i) y.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        const auto lx = dbscan(x, p);
        const auto ly = dbscan(y, p);
        // Core points and noise are order independent; border ties may not be, so compare on core points
        // and noise membership only.
        std::vector<int> back(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) back[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = ly[static_cast<std::size_t>(i)];
        const DistanceMatrix dm(x);
        std::vector<int> core_x, core_y;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
            EXPECT_EQ(lx[i] == kNoise, back[i] == kNoise);
            int cnt = 0;
            for (std::size_t j = 0; j < dm.size(); ++j) cnt += dm(i, j) <= p.eps;
            if (cnt >= p.min_pts) {
                core_x.push_back(lx[i]);
                core_y.push_back(back[i]);
            }
        }
        EXPECT_EQ(oracle::canon(core_x), oracle::canon(core_y));
    }
}

TEST(Dbscan, ScaleHomogeneity) {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const Matrix x = random_points(rng, 40, 3, 10.0);
        const double eps = rng.uniform(1.0, 3.0);
        const double c = 4.0;  // a power of two keeps every scaled distance exact
        EXPECT_EQ(dbscan(x, {eps, 4}), dbscan(Matrix(x * c), {eps * c, 4}));
    }
}

// ---- silhouette -----------------------------------------------------------

TEST(Silhouette, FourPointExample) {
    const Matrix x = column({0, 1, 10, 11});
    const std::vector<int> l{0, 0, 1, 1};
    EXPECT_NEAR(silhouette(x, l), 0.89975, 1e-5);
    EXPECT_NEAR(silhouette(x, l), oracle::silhouette(x, l), 1e-12);
}

TEST(Silhouette, SingletonsScoreZeroAndOneClusterFails) {
    EXPECT_DOUBLE_EQ(silhouette(column({0, 1000}), {0, 1}), 0.0);
    EXPECT_EQ(error_code([] { silhouette(column({0, 1, 2}), {0, 0, 0}); }), Errc::TooFewClusters);
    EXPECT_EQ(error_code([] { silhouette(column({0, 1, 2}), {0, kNoise, kNoise}); }), Errc::TooFewClusters);
}

TEST(Silhouette, NoiseIsExcluded) {
    const Matrix x = column({0, 1, 10, 11, 5});
    EXPECT_DOUBLE_EQ(silhouette(x, {0, 0, 1, 1, kNoise}), silhouette(column({0, 1, 10, 11}), {0, 0, 1, 1}));
}

TEST(Silhouette, MatchesDefinitionOnRandomInstances) {
    Rng rng(17);
    for (int t = 0; t < 100; ++t) {
        const int n = 3 + static_cast<int>(rng.below(40));
        const Matrix x = random_points(rng, n, 3, 5.0);
        std::vector<int> raw(static_cast<std::size_t>(n));
        for (auto& l : raw) l = static_cast<int>(rng.below(4)) - 1;
        const auto labels = canonical_labels(raw);
        int clusters = 0;
        for (int l : labels) clusters = std::max(clusters, l + 1);
        if (clusters < 2) continue;
        EXPECT_NEAR(silhouette(x, labels), oracle::silhouette(x, labels), 1e-9) << "trial " << t;
    }
}

// ---- eps / min_pts selection ----------------------------------------------

TEST(SelectEps, CollinearExample) { EXPECT_DOUBLE_EQ(select_eps(column({0, 1, 3})), 1.0); }

TEST(SelectEps, EqualSpacingIsConstantCurve) {
    EXPECT_EQ(error_code([] { select_eps(column({0, 1, 2, 3, 4, 5})); }), Errc::ConstantCurve);
    EXPECT_EQ(error_code([] { select_eps(column({0, 1})); }), Errc::TooFewSamples);
}

TEST(SelectEps, SeparatesBlobsFromOutliers) {
    auto b = fixture::gaussian_blobs({40, 40}, 2, 0.5, 30.0, 21);
    Matrix x(83, 2);
    x.topRows(80) = b.points;
    x.row(80) << 100, 100;
    x.row(81) << -100, 60;
    x.row(82) << 60, -100;
    const DistanceMatrix d(x);
    double max_intra = 0.0, min_outlier = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 83; ++i) {
        double nn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < 83; ++j)
            if (j != i) nn = std::min(nn, d(i, j));
        (i < 80 ? max_intra : min_outlier) = i < 80 ? std::max(max_intra, nn) : std::min(min_outlier, nn);
    }
    const double eps = select_eps(d);
    // The knee is a sampled curve value, so it can equal the largest intra-blob distance.
    EXPECT_LE(max_intra, eps);
    EXPECT_LT(eps, min_outlier);
}

TEST(SelectMinPts, CleanBlobsPickSmallestCandidate) {
    const auto b = fixture::gaussian_blobs({30, 30}, 2, 0.3, 40.0, 4);
    // Radius of 10 sigma: every candidate min_pts yields the same two blobs.
    const auto s = select_min_pts(b.points, 3.0);
    EXPECT_EQ(s.min_pts, 3);
    for (const auto& c : s.candidates) EXPECT_EQ(c.n_clusters, 2);
    EXPECT_EQ(oracle::canon(s.labels), oracle::canon(b.truth));
}

TEST(SelectMinPts, IdenticalPointsHaveNoConfiguration) {
    const Matrix x = Matrix::Constant(10, 2, 1.0);
    EXPECT_EQ(error_code([&] { select_min_pts(x, 0.5); }), Errc::NoValidConfiguration);
}

TEST(SelectMinPts, ChoiceBeatsEveryCandidate) {
    auto b = fixture::gaussian_blobs({40, 40}, 2, 1.0, 25.0, 8);
    Matrix x(100, 2);
    x.topRows(80) = b.points;
    for (int i = 0; i < 20; ++i) {
        const double th = 2 * 3.14159265358979 * i / 20;
        x.row(80 + i) << 9 + 40 * std::cos(th), 9 + 40 * std::sin(th);
    }
    const double eps = select_eps(x);
    const auto s = select_min_pts(x, eps);
    for (int m = 3; m <= 20; ++m) {
        const auto l = dbscan(x, {eps, m});
        int c = 0;
        for (int v : l) c = std::max(c, v + 1);
        if (c < 2) continue;
        const double sc = oracle::silhouette(x, l);
        EXPECT_GE(s.silhouette + 1e-12, sc) << "min_pts " << m;
        if (m < s.min_pts) {
            EXPECT_LT(sc, s.silhouette) << "tie must go to the smaller candidate";
        }
    }
}

// ---- Ward HAC --------------------------------------------------------------

TEST(Ward, FourPointExample) {
    EXPECT_EQ(hac_ward(column({0, 1, 10, 11}), 2), (std::vector<int>{0, 0, 1, 1}));
    EXPECT_EQ(hac_ward(column({0, 1, 10, 11}), 4), (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(hac_ward(column({0, 1, 10, 11}), 1), (std::vector<int>{0, 0, 0, 0}));
}

TEST(Ward, MergeCostsMatchNaiveWard) {
    // Ward distance between clusters A and B is sqrt(2 |A||B| / (|A|+|B|)) * ||mean_A - mean_B||.
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const int n = 2 + static_cast<int>(rng.below(14));
        const Matrix x = random_points(rng, n, 2, 10.0);
        const auto link = ward_linkage(DistanceMatrix(x));
        ASSERT_EQ(link.merges.size(), static_cast<std::size_t>(n - 1));
        std::vector<std::vector<int>> groups(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) groups[static_cast<std::size_t>(i)] = {i};
        for (const auto& m : link.merges) {
            auto mean = [&](const std::vector<int>& g) {
                Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(2);
                for (int p : g) s += x.row(p);
                return Eigen::RowVectorXd(s / static_cast<double>(g.size()));
            };
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < groups.size(); ++a)
                for (std::size_t c = a + 1; c < groups.size(); ++c) {
                    if (groups[a].empty() || groups[c].empty()) continue;
                    const double na = static_cast<double>(groups[a].size()), nc = static_cast<double>(groups[c].size());
                    best = std::min(best, std::sqrt(2 * na * nc / (na + nc)) * (mean(groups[a]) - mean(groups[c])).norm());
                }
            EXPECT_NEAR(m.cost, best, 1e-9 * (1 + best));
            auto& ga = groups[m.a];
            auto& gb = groups[m.b];
            ga.insert(ga.end(), gb.begin(), gb.end());
            gb.clear();
            EXPECT_EQ(m.size, ga.size());
        }
    }
}

// ---- assignment file -------------------------------------------------------

TEST(Assignment, CsvRoundTripAndValidation) {
    const ClusterAssignment a({"x", "y,z", "w"}, {1, 0, kNoise});
    const auto p = std::filesystem::temp_directory_path() / "rcc_assign_test.csv";
    write_assignment(a, p);
    EXPECT_EQ(load_assignment(p), a);
    std::filesystem::remove(p);
    EXPECT_EQ(a.n_clusters(), 2);
    EXPECT_EQ(a.n_noise(), 1u);
    EXPECT_EQ(error_code([] { ClusterAssignment({"a", "b"}, {0, 2}); }), Errc::InvalidArgument);
}
