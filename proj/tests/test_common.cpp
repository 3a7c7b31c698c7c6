/*
 * Copyright 2026 The hihgnn-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "hihgnn/common.hpp"

using namespace hihgnn;

TEST_SUITE("common") {

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, -3.25e-300, 1e300, 123456789.123456789, 2.0 / 3.0}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1e-7) == "1e-07");
}

TEST_CASE("strict number parsing") {
  CHECK(parse_u64("42") == 42);
  CHECK_THROWS_AS(parse_u64("-1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_u64("4x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_u64(""), std::invalid_argument);
  CHECK(parse_double("-2.5e3") == -2500.0);
  CHECK_THROWS_AS(parse_double("1.0.0"), std::invalid_argument);
}

TEST_CASE("split_ws") {
  auto t = split_ws("  a\tbb   c\r");
  REQUIRE(t.size() == 3);
  CHECK(t[0] == "a");
  CHECK(t[1] == "bb");
  CHECK(t[2] == "c");
  CHECK(split_ws("   ").empty());
}

TEST_CASE("max_relative_error uses the floor for tiny values") {
  std::vector<double> a{1.0, 2e-7, 5.0};
  std::vector<double> b{1.0, 0.0, 5.0};
  CHECK(max_relative_error(a, b) == doctest::Approx(0.2));
  std::vector<double> c{1.0 + 1e-10};
  std::vector<double> d{1.0};
  CHECK(max_relative_error(c, d) == doctest::Approx(1e-10).epsilon(1e-6));
  std::vector<double> e{std::nan("")};
  CHECK(std::isinf(max_relative_error(e, d)));
  std::vector<double> f{1.0, 2.0};
  CHECK(std::isinf(max_relative_error(f, d)));
}

TEST_CASE("derive_seed separates labels and seeds") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s) {
    for (const char* label : {"a", "b", "features/A", "edges/AP"}) seen.insert(derive_seed(s, label));
  }
  CHECK(seen.size() == 200);
  CHECK(derive_seed(7, "x") == derive_seed(7, "x"));
}

TEST_CASE("Rng is reproducible and bounded") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(5);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto x = r.below(7);
    REQUIRE(x < 7);
    ++hist[x];
  }
  for (int h : hist) CHECK(h > 800);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-0.1, 0.1);
    CHECK(u >= -0.1);
    CHECK(u < 0.1);
  }
  CHECK_THROWS_AS(r.below(0), std::invalid_argument);
}

TEST_CASE("Matrix basics") {
  Matrix m(2, 3, 1.5);
  m(1, 2) = -4.0;
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.row(1)[2] == -4.0);
  CHECK(m.all_finite());
  m(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(m.all_finite());
  CHECK(Matrix::identity(3)(2, 2) == 1.0);
  CHECK(Matrix::identity(3)(2, 1) == 0.0);
}

}
