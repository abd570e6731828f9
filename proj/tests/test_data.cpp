#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "rediffuse/dataset.hpp"

using namespace rediffuse;

TEST_CASE("gmm dataset is seeded and bounded") {
  Dataset a = gen_gmm_dataset(50, 4, 3, 77);
  Dataset b = gen_gmm_dataset(50, 4, 3, 77);
  Dataset c = gen_gmm_dataset(50, 4, 3, 78);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  CHECK(a.kind == "gmm");
  for (const auto& s : a.samples)
    for (float v : s.data) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  CHECK_THROWS_AS(gen_gmm_dataset(0, 4, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_gmm_dataset(5, 0, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_gmm_dataset(5, 4, 0, 1), std::invalid_argument);
}

TEST_CASE("degenerate gmm collapses onto the single mean") {
  Dataset ds = gen_gmm_dataset(20, 3, 1, 5, 0.0);
  for (const auto& s : ds.samples) CHECK(s == ds.samples[0]);
}

TEST_CASE("gmm component proportions are near uniform") {
  const size_t n = 10000, K = 4;
  Dataset ds = gen_gmm_dataset(n, 2, K, 31, 0.0);
  std::map<std::pair<float, float>, size_t> counts;
  for (const auto& s : ds.samples) ++counts[{s[0], s[1]}];
  REQUIRE(counts.size() == K);  // means distinct for this seed
  double expect = double(n) / K;
  double sigma = std::sqrt(double(n) * (1.0 / K) * (1.0 - 1.0 / K));
  for (const auto& [mean, cnt] : counts)
    CHECK(std::abs(double(cnt) - expect) <= 3.0 * sigma);
}

TEST_CASE("shape dataset renders from descriptors") {
  Dataset a = gen_shape_dataset(64, 16, 123);
  Dataset b = gen_shape_dataset(64, 16, 123);
  CHECK(a.samples == b.samples);
  CHECK(a.descriptors.size() == 64);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(render_shape(a.descriptors[i], 16) == a.samples[i]);
    for (float v : a.samples[i].data) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
  CHECK_THROWS_AS(gen_shape_dataset(4, 7, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_shape_dataset(0, 16, 1), std::invalid_argument);
}

TEST_CASE("shape images are mostly background") {
  Dataset ds = gen_shape_dataset(1000, 16, 9);
  double frac_sum = 0.0;
  for (const auto& img : ds.samples) {
    size_t zeros = 0;
    for (float v : img.data)
      if (v == 0.0f) ++zeros;
    frac_sum += double(zeros) / double(img.numel());
  }
  CHECK(frac_sum / double(ds.size()) >= 0.5);
}

TEST_CASE("style shift keeps geometry and changes pixels") {
  Dataset ds = gen_shape_dataset(40, 16, 55);
  Dataset shifted = style_shift(ds, 99);
  REQUIRE(shifted.size() == ds.size());
  CHECK(shifted.kind == "style_shift");

  for (size_t i = 0; i < ds.size(); ++i) {
    const auto& o = ds.samples[i];
    const auto& s = shifted.samples[i];
    size_t inter = 0, uni = 0;
    double absdiff = 0.0;
    for (size_t j = 0; j < o.numel(); ++j) {
      bool a = o[j] > 0.0f, b = s[j] > 0.0f;
      inter += a && b;
      uni += a || b;
      absdiff += std::abs(double(o[j]) - double(s[j]));
    }
    CHECK(inter == uni);  // mask IoU exactly 1
    CHECK(absdiff / double(o.numel()) > 0.0);
    CHECK((shifted.descriptors[i].texture == "stripes" ||
           shifted.descriptors[i].texture == "checker"));
  }

  Dataset gmm = gen_gmm_dataset(5, 3, 2, 1);
  CHECK_THROWS_AS(style_shift(gmm, 1), std::invalid_argument);
}

TEST_CASE("stripe texture has the configured period") {
  ShapeDescriptor d;
  d.kind = "rect";
  d.cx = 16;
  d.cy = 16;
  d.a = 14;
  d.b = 14;
  d.fill = 0.9f;
  d.fill2 = 0.3f;
  d.texture = "stripes";
  d.stripe_width = 2;
  ImageTensor img = render_shape(d, 32);

  // autocorrelation of one interior row, mean removed
  std::vector<double> row(32);
  for (int c = 0; c < 32; ++c) row[size_t(c)] = img.data[16 * 32 + c];
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= 32.0;
  int best_lag = 0;
  double best = -1e9;
  for (int lag = 1; lag <= 8; ++lag) {
    double acc = 0.0;
    for (int c = 0; c + lag < 32; ++c)
      acc += (row[size_t(c)] - mean) * (row[size_t(c + lag)] - mean);
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  CHECK(best_lag == 2 * d.stripe_width);
}

TEST_CASE("membership split is a seeded 50/50 partition") {
  Dataset ds = gen_gmm_dataset(10, 2, 2, 3);
  MembershipSplit s1 = split_members(ds, 42);
  MembershipSplit s2 = split_members(ds, 42);
  CHECK(s1.members == s2.members);
  CHECK(s1.members.size() == 5);
  CHECK(s1.nonmembers.size() == 5);

  std::set<size_t> all(s1.members.begin(), s1.members.end());
  all.insert(s1.nonmembers.begin(), s1.nonmembers.end());
  CHECK(all.size() == 10);

  // marginal membership probability across reseeds
  std::vector<int> hits(10, 0);
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    MembershipSplit s = split_members(ds, seed);
    for (size_t i : s.members) ++hits[i];
  }
  for (int h : hits) CHECK(std::abs(h / 1000.0 - 0.5) <= 0.05);

  Dataset empty;
  CHECK_THROWS_AS(split_members(empty, 1), std::invalid_argument);
}

TEST_CASE("dataset persistence round trips") {
  Dataset ds = gen_shape_dataset(12, 16, 2024);
  MembershipSplit split = split_members(ds, 7);
  auto dir = std::filesystem::temp_directory_path() / "rdf_ds_test";
  std::filesystem::remove_all(dir);
  save_dataset(dir, ds, split);

  auto [back, bsplit] = load_dataset(dir);
  CHECK(back.kind == ds.kind);
  CHECK(back.seed == ds.seed);
  CHECK(back.samples == ds.samples);
  CHECK(bsplit.members == split.members);
  CHECK(bsplit.nonmembers == split.nonmembers);
  REQUIRE(back.descriptors.size() == ds.descriptors.size());
  for (size_t i = 0; i < back.size(); ++i)
    CHECK(render_shape(back.descriptors[i], 16) == back.samples[i]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("counted access path") {
  Dataset ds = gen_gmm_dataset(4, 2, 1, 0);
  CHECK(ds.accesses(2) == 0);
  (void)ds.sample(2);
  (void)ds.sample(2);
  CHECK(ds.accesses(2) == 2);
  (void)ds.peek(1);
  CHECK(ds.accesses(1) == 0);
  ds.reset_access_counts();
  CHECK(ds.accesses(2) == 0);
}
