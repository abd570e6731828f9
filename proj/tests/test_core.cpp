#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "rediffuse/io.hpp"
#include "rediffuse/parallel.hpp"
#include "rediffuse/rng.hpp"
#include "rediffuse/schedule.hpp"
#include "rediffuse/tensor.hpp"

using namespace rediffuse;

TEST_CASE("tensor shape and data checks") {
  ImageTensor t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.data.size() == 6);
  CHECK(t[0] == 0.0f);

  CHECK_THROWS_AS(ImageTensor({2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(ImageTensor({2}, {1.0f, 2.0f, 3.0f}),
                  std::invalid_argument);

  ImageTensor a({2}, {3.0f, 4.0f});
  CHECK(l2_norm(a) == doctest::Approx(5.0));
  ImageTensor b({2}, {0.0f, 0.0f});
  CHECK(l2_dist(a, b) == doctest::Approx(5.0));
  CHECK(linf_dist(a, b) == doctest::Approx(4.0));

  ImageTensor bad({1}, {1.0f});
  bad.data[0] = std::nanf("");
  CHECK(!bad.all_finite());
  CHECK_THROWS(require_finite(bad, "test"));
}

TEST_CASE("rng streams are deterministic and well-behaved") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(7);
  double mean = 0.0, var = 0.0;
  const int N = 100000;
  std::vector<float> buf(N);
  c.fill_normal(buf.data(), N);
  for (float v : buf) mean += v;
  mean /= N;
  for (float v : buf) var += (v - mean) * (v - mean);
  var /= N;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));

  Rng u(11);
  for (int i = 0; i < 1000; ++i) {
    double x = u.next_double();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }

  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 1, 3));
  CHECK(derive_seed(5, 9, 0) == derive_seed(5, 9, 0));
}

TEST_CASE("tnsr round trip and validation") {
  ImageTensor t({2, 2}, {1.5f, -2.25f, 0.0f, 3.0e-8f});
  auto bytes = tensor_to_bytes(t);
  ImageTensor back = tensor_from_bytes(bytes);
  CHECK(back == t);

  CHECK(bytes[0] == 'T');
  CHECK(bytes[4] == 0);
  CHECK(bytes[5] == 2);

  auto dir = std::filesystem::temp_directory_path() / "rdf_core_test";
  std::filesystem::create_directories(dir);
  write_tensor(dir / "t.tnsr", t);
  CHECK(read_tensor(dir / "t.tnsr") == t);
  std::filesystem::remove_all(dir);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(tensor_from_bytes(bad), std::invalid_argument);
  bad = bytes;
  bad[4] = 1;
  CHECK_THROWS_AS(tensor_from_bytes(bad), std::invalid_argument);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(tensor_from_bytes(bad), std::invalid_argument);
}

TEST_CASE("base64 round trip") {
  std::vector<uint8_t> data;
  for (int n = 0; n < 10; ++n) {
    CHECK(base64_decode(base64_encode(data)) == data);
    data.push_back(uint8_t(17 * n + 3));
  }
  CHECK(base64_encode(std::vector<uint8_t>{'M', 'a', 'n'}) == "TWFu");
  CHECK(base64_encode(std::vector<uint8_t>{'M', 'a'}) == "TWE=");
  CHECK(base64_encode(std::vector<uint8_t>{'M'}) == "TQ==");

  CHECK_THROWS_AS(base64_decode("abc"), std::invalid_argument);
  CHECK_THROWS_AS(base64_decode("a!cd"), std::invalid_argument);
  CHECK_THROWS_AS(base64_decode("=abc"), std::invalid_argument);

  ImageTensor t({3}, {1.0f, 2.0f, 3.0f});
  CHECK(tensor_from_base64(tensor_to_base64(t)) == t);
}

TEST_CASE("float formatting round trips") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 3.0024e-5, 1e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  for (float v : {0.5f, 1.0f / 3.0f, -2.7e-12f}) {
    CHECK(std::stof(format_float(v)) == v);
  }
}

TEST_CASE("schedule matches hand-computed products") {
  NoiseSchedule s = build_schedule(4, 0.1, 0.4);
  CHECK(s.T() == 4);
  CHECK(s.alpha_bar(1) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(s.alpha_bar(2) == doctest::Approx(0.72).epsilon(1e-12));
  CHECK(s.alpha_bar(3) == doctest::Approx(0.504).epsilon(1e-12));
  CHECK(s.alpha_bar(4) == doctest::Approx(0.3024).epsilon(1e-12));

  NoiseSchedule one = build_schedule(1, 0.5, 0.5);
  CHECK(one.alpha_bar(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.alpha_bar(0) == 1.0);
}

TEST_CASE("schedule invariants over the default range") {
  NoiseSchedule s = build_schedule(1000, 1e-4, 0.02);
  CHECK(s.beta(1) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(s.beta(1000) == 0.02);
  for (int t = 1; t <= 1000; ++t) {
    CHECK(s.alpha(t) + s.beta(t) == 1.0);
    CHECK(s.alpha_bar(t) > 0.0);
    CHECK(s.alpha_bar(t) < 1.0);
    CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    double rel = std::abs(s.alpha_bar(t) - s.alpha_bar(t - 1) * s.alpha(t)) /
                 s.alpha_bar(t);
    CHECK(rel <= 1e-12);
  }
}

TEST_CASE("schedule rejects bad parameters") {
  CHECK_THROWS_AS(build_schedule(0, 0.1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, -0.1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(10, 0.3, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSchedule(3, {0.1, 0.2}), std::invalid_argument);

  NoiseSchedule s = build_schedule(4, 0.1, 0.4);
  CHECK_THROWS_AS(s.beta(0), std::out_of_range);
  CHECK_THROWS_AS(s.beta(5), std::out_of_range);
  CHECK_THROWS_AS(s.alpha_bar(5), std::out_of_range);
}

TEST_CASE("parallel loop matches serial loop") {
  const size_t n = 4096;
  std::vector<uint64_t> serial(n), parallel(n);
  par::for_each_index_serial(n, [&](size_t i) { serial[i] = mix64(i); });

  int saved = par::threads();
  par::set_threads(4);
  par::for_each_index(n, [&](size_t i) { parallel[i] = mix64(i); });
  par::set_threads(0);
  CHECK(serial == parallel);
  CHECK(saved >= 1);

  CHECK_THROWS_AS(par::for_each_index(
                      8, [&](size_t) { throw std::runtime_error("boom"); }),
                  std::runtime_error);
}
