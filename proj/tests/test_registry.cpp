#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "gmoe/registry.hpp"
#include "gmoe/rng.hpp"

using namespace gmoe;

TEST_CASE("class counts match the known graph counts per order") {
  ClassRegistry reg(6);
  CHECK(reg.class_count(2) == 2);
  CHECK(reg.class_count(3) == 4);
  CHECK(reg.class_count(4) == 11);
  CHECK(reg.class_count(5) == 34);
  CHECK(reg.class_count(6) == 156);
}

TEST_CASE("class sizes partition all patterns of each order") {
  ClassRegistry reg(6);
  for (int p = 2; p <= 6; ++p) {
    std::uint64_t total = 0;
    for (const auto& c : reg.classes(p)) total += c.size;
    CHECK(total == (std::uint64_t{1} << pair_count(p)));
  }
}

TEST_CASE("order bounds are enforced") {
  CHECK_THROWS_AS(ClassRegistry(9), ConfigError);
  CHECK_THROWS_AS(ClassRegistry(1), ConfigError);
  ClassRegistry reg(4);
  CHECK_THROWS_AS(reg.classify(EdgeCode{5, 0}), ConfigError);
}

TEST_CASE("classify: named order-3 classes") {
  ClassRegistry reg(3);
  const int empty3 = reg.classify(EdgeCode{3, 0});
  const int tri = reg.classify(EdgeCode{3, 0b111});
  CHECK(empty3 != tri);
  CHECK(reg.class_info(3, empty3).size == 1);
  CHECK(reg.class_info(3, tri).size == 1);
  // the three single-edge patterns share a class of size 3
  const int e1 = reg.classify(EdgeCode{3, 0b001});
  CHECK(reg.classify(EdgeCode{3, 0b010}) == e1);
  CHECK(reg.classify(EdgeCode{3, 0b100}) == e1);
  CHECK(reg.class_info(3, e1).size == 3);
}

TEST_CASE("classification is permutation invariant at every dense order") {
  ClassRegistry reg(6);
  Rng rng(17);
  for (int p = 2; p <= 6; ++p) {
    const int m = pair_count(p);
    for (int rep = 0; rep < 1000; ++rep) {
      const EdgeCode code{p, static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << m))};
      const auto perm = random_permutation(rng, p);
      CHECK(reg.classify(code) == reg.classify(permute_code(code, perm)));
    }
  }
}

TEST_CASE("canonical code is the class minimum and stable") {
  ClassRegistry reg(5);
  Rng rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    const EdgeCode code{5, static_cast<std::uint32_t>(rng.below(1u << 10))};
    const EdgeCode canon = reg.canonical_code(code);
    CHECK(canon.bits <= code.bits);
    CHECK(reg.classify(canon) == reg.classify(code));
    CHECK(canonical_min_code(code) == canon);
  }
}

TEST_CASE("orbit size equals permutations over automorphisms at dense orders") {
  ClassRegistry reg(6);
  Rng rng(29);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 4 + static_cast<int>(rng.below(3));
    const EdgeCode code{p, static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << pair_count(p)))};
    const auto info = reg.class_info(p, reg.classify(code));
    CHECK(info.size == factorial(p) / automorphism_count(info.canonical));
  }
}

TEST_CASE("lazy orders classify through canonical forms") {
  ClassRegistry reg(8, 6);
  CHECK_FALSE(reg.is_dense(7));
  Rng rng(31);
  for (int p = 7; p <= 8; ++p) {
    for (int rep = 0; rep < 50; ++rep) {
      const EdgeCode code{p, static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << pair_count(p)))};
      const auto perm = random_permutation(rng, p);
      CHECK(reg.classify(code) == reg.classify(permute_code(code, perm)));
    }
  }
  CHECK_THROWS_AS(reg.classes(7), ConfigError);
}

TEST_CASE("lazy class sizes: known order-8 graphlets") {
  ClassRegistry reg(8, 4);
  // 8-star: hub adjacent to all others; automorphisms fix the hub = 7!
  EdgeCode star{8, 0};
  for (int j = 1; j < 8; ++j) star.set_edge(0, j);
  const int sid = reg.classify(star);
  CHECK(reg.class_info(8, sid).size == 8);
  // 8-cycle: dihedral symmetry of size 16
  EdgeCode cyc{8, 0};
  for (int j = 0; j < 8; ++j) cyc.set_edge(j, (j + 1) % 8);
  const int cid = reg.classify(cyc);
  CHECK(reg.class_info(8, cid).size == factorial(8) / 16);
}

TEST_CASE("dense order 7 builds the full table when requested") {
  ClassRegistry reg(7, 7);
  CHECK(reg.class_count(7) == 1044);
  std::uint64_t total = 0;
  for (const auto& c : reg.classes(7)) total += c.size;
  CHECK(total == (std::uint64_t{1} << 21));
}

TEST_CASE("registry dump/load round-trips") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "gmoe_registry_test.bin").string();
  ClassRegistry reg(5);
  reg.dump(path);
  const ClassRegistry loaded = ClassRegistry::load(path);
  CHECK(loaded.max_order() == 5);
  for (int p = 2; p <= 5; ++p) {
    REQUIRE(loaded.class_count(p) == reg.class_count(p));
    for (int c = 0; c < reg.class_count(p); ++c) {
      CHECK(loaded.class_info(p, c).canonical == reg.class_info(p, c).canonical);
      CHECK(loaded.class_info(p, c).size == reg.class_info(p, c).size);
    }
  }
  Rng rng(37);
  for (int rep = 0; rep < 200; ++rep) {
    const EdgeCode code{5, static_cast<std::uint32_t>(rng.below(1u << 10))};
    CHECK(loaded.classify(code) == reg.classify(code));
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(ClassRegistry::load(path), DataError);
}
