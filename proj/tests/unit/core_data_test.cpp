#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles/fixtures.hpp"
#include "rcc/core/feature_io.hpp"
#include "rcc/core/labeling.hpp"
#include "rcc/core/manifest.hpp"
#include "rcc/random.hpp"

namespace fs = std::filesystem;
using namespace rcc;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("rcc_core_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

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

}  // namespace

TEST(Manifest, ReadsClassifierRows) {
    TempDir dir;
    write(dir / "m.csv",
          "id,path,true,pred,scenario\n"
          "a,a.png,TopLeft,TopLeft,\n"
          "b,b.png,TopLeft,BottomRight,blur\n"
          "c,c.png,Center,Center,noise\n");
    const auto d = load_manifest(dir / "m.csv");
    ASSERT_EQ(d.size(), 3u);
    EXPECT_TRUE(is_classification(d.task()));
    EXPECT_EQ(d.records()[1].id, "b");
    EXPECT_EQ(d.records()[1].scenario, "blur");
    EXPECT_FALSE(d.records()[0].is_injected());
}

TEST(Manifest, DuplicateIdIsRejected) {
    TempDir dir;
    write(dir / "m.csv", "id,path,true,pred,scenario\nimg7,,A,A,\nimg7,,B,B,\n");
    EXPECT_EQ(error_code([&] { load_manifest(dir / "m.csv"); }), Errc::DuplicateId);
}

TEST(Manifest, RegressionSidecarCarriesThreshold) {
    TempDir dir;
    write(dir / "sap.csv", "id,path,true,pred,scenario\nx,,0.1,0.6,\ny,,0.2,0.25,\n");
    write(dir / "sap.json", R"({"task":"regression","metric":"squared_error","threshold":0.18})");
    const auto d = load_manifest(dir / "sap.csv");
    const auto& task = std::get<RegressionTask>(d.task());
    EXPECT_DOUBLE_EQ(task.threshold, 0.18);
    EXPECT_EQ(task.metric, RegressionMetric::SquaredError);
}

TEST(Manifest, ErrorPaths) {
    TempDir dir;
    EXPECT_EQ(error_code([&] { load_manifest(dir / "absent.csv"); }), Errc::MissingFile);
    write(dir / "bad.csv", "id,path,true,pred,scenario\na,,A\n");
    EXPECT_EQ(error_code([&] { load_manifest(dir / "bad.csv"); }), Errc::ParseError);
    write(dir / "mixed.csv", "id,path,true,pred,scenario\na,,1;2,1;2,\nb,,1,1,\n");
    write(dir / "mixed.json", R"({"task":"regression","metric":"point_distance","threshold":10})");
    EXPECT_EQ(error_code([&] { load_manifest(dir / "mixed.csv"); }), Errc::MixedOutputKinds);
    write(dir / "label.csv", "id,path,true,pred,scenario\na,,Left,Right,\n");
    write(dir / "label.json", R"({"task":"regression","threshold":0.5})");
    EXPECT_EQ(error_code([&] { load_manifest(dir / "label.csv"); }), Errc::MixedOutputKinds);
}

TEST(Manifest, WriteThenLoadPreservesRecords) {
    TempDir dir;
    std::vector<ImageRecord> recs{{"p,1", "x.png", std::vector<double>{1.5, 2.0}, std::vector<double>{1.0, 3.25}, "mask"},
                                  {"p2", "", std::vector<double>{0, 0}, std::vector<double>{0, 0}, ""}};
    const Dataset d(recs, RegressionTask{10.0, RegressionMetric::PointDistance});
    write_manifest(d, dir / "out.csv");
    const auto back = load_manifest(dir / "out.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back.records()[0].id, "p,1");
    EXPECT_EQ(std::get<std::vector<double>>(back.records()[0].predicted_output), (std::vector<double>{1.0, 3.25}));
    EXPECT_EQ(std::get<RegressionTask>(back.task()).metric, RegressionMetric::PointDistance);
}

TEST(FeatureMatrix, CsvReadsHeaderAndRows) {
    TempDir dir;
    write(dir / "f.csv", "id,f0,f1\na,1.5,-2\nb,0,1e3\n");
    const auto m = load_feature_matrix(dir / "f.csv");
    ASSERT_EQ(m.rows(), 2u);
    ASSERT_EQ(m.cols(), 2u);
    EXPECT_EQ(m.values()(1, 1), 1000.0);
    EXPECT_EQ(m.ids()[0], "a");
}

TEST(FeatureMatrix, RejectsNonFiniteAndRagged) {
    TempDir dir;
    write(dir / "nan.csv", "id,f0,f1\na,1,NaN\n");
    EXPECT_EQ(error_code([&] { load_feature_matrix(dir / "nan.csv"); }), Errc::NonFiniteValue);
    write(dir / "rag.csv", "id,f0,f1\na,1,2\nb,3\n");
    EXPECT_EQ(error_code([&] { load_feature_matrix(dir / "rag.csv"); }), Errc::RaggedRow);
    write(dir / "junk.csv", "id,f0\na,1x\n");
    EXPECT_EQ(error_code([&] { load_feature_matrix(dir / "junk.csv"); }), Errc::ParseError);
}

TEST(FeatureMatrix, SingleValueRoundTrips) {
    TempDir dir;
    const FeatureMatrix m({"only"}, Matrix::Constant(1, 1, 0.5));
    for (auto fmt : {FeatureFormat::Csv, FeatureFormat::Fmx1}) {
        write_feature_matrix(m, dir / "one", fmt);
        EXPECT_EQ(load_feature_matrix(dir / "one"), m);
    }
}

TEST(FeatureMatrix, Fmx1ByteSize) {
    TempDir dir;
    Matrix v = Matrix::Random(3, 4);
    const FeatureMatrix m({"a", "bb", "ccc"}, v);
    write_feature_matrix(m, dir / "m.fmx", FeatureFormat::Fmx1);
    const std::size_t id_table = (4 + 1) + (4 + 2) + (4 + 3);
    EXPECT_EQ(fs::file_size(dir / "m.fmx"), 20u + 3u * 4u * 8u + id_table);
    std::ifstream in(dir / "m.fmx", std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    EXPECT_EQ(std::string(magic, 4), "FMX1");
    unsigned char n_le[8];
    in.read(reinterpret_cast<char*>(n_le), 8);
    EXPECT_EQ(n_le[0], 3);
    for (int i = 1; i < 8; ++i) EXPECT_EQ(n_le[i], 0);
}

TEST(FeatureMatrix, EmptyMatrixIsNotWritten) {
    TempDir dir;
    EXPECT_EQ(error_code([&] { write_feature_matrix(FeatureMatrix{}, dir / "e.fmx", FeatureFormat::Fmx1); }),
              Errc::InvalidArgument);
    EXPECT_FALSE(fs::exists(dir / "e.fmx"));
    EXPECT_EQ(error_code([&] { FeatureMatrix({}, Matrix(0, 3)); }), Errc::InvalidArgument);
}

// load(write(m)) == m over random shapes and values, both formats.
TEST(FeatureMatrix, RoundTripProperty) {
    TempDir dir;
    Rng rng(1234);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = 1 + static_cast<Eigen::Index>(rng.below(12));
        const auto m = 1 + static_cast<Eigen::Index>(rng.below(9));
        Matrix v(n, m);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < m; ++c) {
                const double mag = std::pow(10.0, rng.uniform(-300.0, 300.0));
                v(r, c) = (rng.uniform() < 0.5 ? -mag : mag) * (rng.uniform() < 0.1 ? 0.0 : 1.0);
            }
        const FeatureMatrix fm(fixture::make_ids(static_cast<std::size_t>(n), "id-" + std::to_string(trial) + "-"), v);
        write_feature_matrix(fm, dir / "p.fmx", FeatureFormat::Fmx1);
        EXPECT_EQ(load_feature_matrix(dir / "p.fmx"), fm);
        write_feature_matrix(fm, dir / "p.csv", FeatureFormat::Csv);
        EXPECT_EQ(load_feature_matrix(dir / "p.csv"), fm);  // shortest round-trip formatting is exact
    }
}

TEST(LabelFailures, ClassifierEquality) {
    const Dataset d({{"a", "", std::string("TopLeft"), std::string("TopLeft"), ""},
                     {"b", "", std::string("TopLeft"), std::string("Center"), ""}},
                    ClassificationTask{});
    EXPECT_EQ(label_failures(d), (std::vector<std::string>{"b"}));
}

TEST(LabelFailures, SquaredErrorThresholdIsExclusive) {
    // (0.6 - 0.1)^2 = 0.25 and (sqrt(0.20))^2 ~ 0.20 exceed 0.18; an error of exactly the threshold does not.
    const double over = std::sqrt(0.20);
    const Dataset d({{"big", "", std::vector<double>{0.1}, std::vector<double>{0.6}, ""},
                     {"sap", "", std::vector<double>{0.0}, std::vector<double>{over}, ""},
                     {"edge", "", std::vector<double>{0.0}, std::vector<double>{0.5}, ""},
                     {"ok", "", std::vector<double>{0.2}, std::vector<double>{0.25}, ""}},
                    RegressionTask{0.25, RegressionMetric::SquaredError});
    EXPECT_EQ(label_failures(d), (std::vector<std::string>{}));  // 0.25 is not above 0.25
    const Dataset sap(d.records(), RegressionTask{0.18, RegressionMetric::SquaredError});
    EXPECT_EQ(label_failures(sap), (std::vector<std::string>{"big", "sap", "edge"}));
}

TEST(LabelFailures, PointDistance) {
    const Dataset d({{"cpd", "", std::vector<double>{0, 0, 50, 50}, std::vector<double>{1, 1, 62, 50}, ""},
                     {"edge", "", std::vector<double>{0, 0, 0, 0}, std::vector<double>{6, 8, 0, 0}, ""},
                     {"ok", "", std::vector<double>{5, 5, 5, 5}, std::vector<double>{6, 6, 5, 5}, ""}},
                    RegressionTask{10.0, RegressionMetric::PointDistance});
    EXPECT_EQ(label_failures(d), (std::vector<std::string>{"cpd"}));
}

TEST(LabelFailures, IdempotentOrderPreservingAndComplete) {
    Rng rng(7);
    std::vector<ImageRecord> recs;
    for (int i = 0; i < 200; ++i) {
        const std::string t = "c" + std::to_string(rng.below(4));
        const std::string p = "c" + std::to_string(rng.below(4));
        recs.push_back({"r" + std::to_string(i), "", t, p, ""});
    }
    const Dataset d(recs, ClassificationTask{});
    const auto failing = label_failures(d);
    const auto again = label_failures(d.subset(failing));
    EXPECT_EQ(again, failing);
    std::size_t correct = 0;
    for (const auto& r : d.records()) correct += std::get<std::string>(r.true_output) == std::get<std::string>(r.predicted_output);
    EXPECT_EQ(failing.size() + correct, d.size());
    EXPECT_TRUE(std::is_sorted(failing.begin(), failing.end(), [&](const std::string& a, const std::string& b) {
        return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
    }));
}

TEST(FailureSet, AlignsFeaturesToFailingRecords) {
    const Dataset d({{"a", "", std::string("x"), std::string("y"), "blur"},
                     {"b", "", std::string("x"), std::string("x"), ""},
                     {"c", "", std::string("x"), std::string("z"), ""}},
                    ClassificationTask{});
    Matrix v(3, 1);
    v << 30, 10, 20;
    const FeatureMatrix f({"c", "b", "a"}, v);
    const auto fs = make_failure_set(d, f);
    EXPECT_EQ(fs.features.ids(), (std::vector<std::string>{"a", "c"}));
    EXPECT_EQ(fs.features.values()(0, 0), 20.0);
    EXPECT_EQ(fs.ids(), fs.features.ids());
}
