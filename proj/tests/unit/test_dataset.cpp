#include "hpo/dataset.hpp"
#include "hpo/error.hpp"
#include "hpo/rng.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <charconv>
#include <cmath>

using namespace hpo;

namespace {

std::string error_of(const std::filesystem::path& path) {
  try {
    read_dataset(path);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.index(80)) - 40);
    const std::string text = format_double(v);
    double back = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), back);
    ASSERT_EQ(back, v) << text;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Dataset, WriteReadRoundTrip) {
  GroupedDataset ds;
  ds.features.resize(3, 2);
  ds.features << 0.1, 1e-300, -2.5, 3.0, 1.0 / 3.0, 7.0;
  ds.labels = {0, 2, 1};
  ds.groups = {"a", "b", "a"};
  ds.sample_ids = {"x1", "x2", "x3"};
  ds.num_classes = 3;
  const auto dir = hpo::testing::scratch_dir("dataset");
  write_dataset(dir / "d.csv", ds);
  const auto back = read_dataset(dir / "d.csv");
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.groups, ds.groups);
  EXPECT_EQ(back.sample_ids, ds.sample_ids);
  EXPECT_EQ(back.num_classes, 3);
  EXPECT_EQ(back.distinct_groups(), (std::vector<std::string>{"a", "b"}));
  const std::vector<std::size_t> rows{2, 0};
  const auto sub = ds.subset(rows);
  EXPECT_EQ(sub.sample_ids, (std::vector<std::string>{"x3", "x1"}));
  EXPECT_EQ(sub.features.row(0), ds.features.row(2));
}

TEST(Dataset, ErrorsCarryPathAndLine) {
  const auto dir = hpo::testing::scratch_dir("dataset-errors");
  hpo::testing::write_file(dir / "bad_number.csv", "sample_id,group_id,label,f0\ns1,g,0,1.0\ns2,g,1,abc\n");
  EXPECT_NE(error_of(dir / "bad_number.csv").find("bad_number.csv:3"), std::string::npos)
      << error_of(dir / "bad_number.csv");
  hpo::testing::write_file(dir / "bad_label.csv", "sample_id,group_id,label,f0\ns1,g,-1,1.0\n");
  EXPECT_NE(error_of(dir / "bad_label.csv").find(":2"), std::string::npos);
  hpo::testing::write_file(dir / "ragged.csv", "sample_id,group_id,label,f0\ns1,g,0\n");
  EXPECT_NE(error_of(dir / "ragged.csv").find(":2"), std::string::npos);
  hpo::testing::write_file(dir / "header.csv", "id,group,label,f0\n");
  EXPECT_NE(error_of(dir / "header.csv").find(":1"), std::string::npos);
  hpo::testing::write_file(dir / "one_class.csv", "sample_id,group_id,label,f0\ns1,g,0,1.0\n");
  EXPECT_FALSE(error_of(dir / "one_class.csv").empty());
  EXPECT_FALSE(error_of(dir / "missing.csv").empty());
}

TEST(Predictions, RoundTripAndValidation) {
  PredictionSet p;
  p.probabilities.resize(2, 2);
  p.probabilities << 0.25, 0.75, 0.9, 0.1;
  p.labels = {1, 0};
  p.sample_ids = {"a", "b"};
  const auto dir = hpo::testing::scratch_dir("predictions");
  write_predictions(dir / "p.csv", p);
  const auto back = read_predictions(dir / "p.csv");
  EXPECT_EQ(back.probabilities, p.probabilities);
  EXPECT_EQ(back.labels, p.labels);
  EXPECT_EQ(back.sample_ids, p.sample_ids);

  auto bad = p;
  bad.probabilities(0, 0) = 0.3;
  EXPECT_THROW(bad.validate(), DataError);
  bad = p;
  bad.labels[0] = 2;
  EXPECT_THROW(bad.validate(), DataError);
  hpo::testing::write_file(dir / "bad.csv", "sample_id,label,p0,p1\na,1,0.5,0.6\n");
  EXPECT_THROW(read_predictions(dir / "bad.csv"), DataError);
}
