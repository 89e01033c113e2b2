#include "gmoe/registry.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

namespace gmoe {
namespace {

constexpr std::uint16_t kUnassigned = 0xFFFF;

// Vertex blocks of equal isomorphism-invariant signature (degree plus the
// sorted neighbor degrees). Automorphisms map each block onto itself.
std::vector<std::vector<int>> signature_blocks(EdgeCode code) {
  const int p = code.order;
  std::vector<int> deg(static_cast<std::size_t>(p), 0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (j != i && code.edge(i, j)) ++deg[static_cast<std::size_t>(i)];

  std::vector<std::vector<int>> sig(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    auto& s = sig[static_cast<std::size_t>(i)];
    s.push_back(deg[static_cast<std::size_t>(i)]);
    for (int j = 0; j < p; ++j)
      if (j != i && code.edge(i, j)) s.push_back(deg[static_cast<std::size_t>(j)]);
    std::sort(s.begin() + 1, s.end());
  }

  std::vector<int> verts(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) verts[static_cast<std::size_t>(i)] = i;
  std::sort(verts.begin(), verts.end(), [&](int a, int b) {
    return sig[static_cast<std::size_t>(a)] < sig[static_cast<std::size_t>(b)];
  });

  std::vector<std::vector<int>> blocks;
  for (int v : verts) {
    if (blocks.empty() ||
        sig[static_cast<std::size_t>(blocks.back().back())] !=
            sig[static_cast<std::size_t>(v)])
      blocks.emplace_back();
    blocks.back().push_back(v);
  }
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  return blocks;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

std::uint64_t automorphism_count(EdgeCode code) {
  const int p = code.order;
  const auto blocks = signature_blocks(code);
  // Enumerate block-preserving bijections: each block maps onto itself.
  std::vector<std::vector<int>> images = blocks;
  int perm[kMaxGraphletOrder];
  std::uint64_t count = 0;
  auto rec = [&](auto&& self, std::size_t b) -> void {
    if (b == blocks.size()) {
      for (std::size_t blk = 0; blk < blocks.size(); ++blk)
        for (std::size_t i = 0; i < blocks[blk].size(); ++i)
          perm[blocks[blk][i]] = images[blk][i];
      for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
          if (code.edge(i, j) != code.edge(perm[i], perm[j])) return;
      ++count;
      return;
    }
    auto& img = images[b];
    std::sort(img.begin(), img.end());
    do {
      self(self, b + 1);
    } while (std::next_permutation(img.begin(), img.end()));
  };
  rec(rec, 0);
  return count;
}

// Minimum code over all p! vertex arrangements by branch-and-bound. Bits are
// row-major, so the pairs among positions {k..p-1} occupy the top of the
// word; assigning positions from the back makes every partial assignment a
// determined high-bit prefix that can be compared against the incumbent.
EdgeCode canonical_min_code(EdgeCode code) {
  const int p = code.order;
  const int m = pair_count(p);
  std::uint32_t best = ~0u;
  int arr[kMaxGraphletOrder];
  bool used[kMaxGraphletOrder] = {false};

  auto rec = [&](auto&& self, int k, std::uint32_t partial) -> void {
    if (k < 0) {
      if (partial < best) best = partial;
      return;
    }
    // Candidate row values for position k against the fixed tail.
    struct Cand {
      std::uint32_t row;
      int v;
    };
    Cand cands[kMaxGraphletOrder];
    int ncand = 0;
    for (int v = 0; v < p; ++v) {
      if (used[v]) continue;
      std::uint32_t row = 0;
      for (int j = k + 1; j < p; ++j)
        if (code.edge(v, arr[j])) row |= 1u << pair_index(p, k, j);
      cands[ncand++] = {row, v};
    }
    std::sort(cands, cands + ncand,
              [](const Cand& a, const Cand& b) { return a.row < b.row; });
    for (int c = 0; c < ncand; ++c) {
      const std::uint32_t next = partial | cands[c].row;
      // Rows k..p-2 are decided; higher-or-equal prefixes cannot win.
      const std::uint32_t mask = m == 32 ? ~0u : ~((1u << pair_index(p, k, k + 1)) - 1u);
      if (k < p - 1 && (next & mask) > (best & mask)) continue;
      arr[k] = cands[c].v;
      used[cands[c].v] = true;
      self(self, k - 1, next);
      used[cands[c].v] = false;
    }
  };
  rec(rec, p - 1, 0u);
  return EdgeCode{p, best};
}

ClassRegistry::ClassRegistry(int max_order, int max_dense_order) {
  if (max_order < 2 || max_order > kMaxSupportedOrder)
    throw ConfigError("unsupported registry order " + std::to_string(max_order));
  max_order_ = max_order;
  max_dense_order_ = std::clamp(max_dense_order, 2, max_order);
  for (int p = 2; p <= max_dense_order_; ++p) build_dense(p);
}

// Orbit enumeration: scan codes in increasing order; each unassigned code is
// the minimum of a fresh class, whose orbit is flooded through adjacent
// transpositions (they generate the full symmetric group).
void ClassRegistry::build_dense(int p) {
  const int m = pair_count(p);
  auto& table = table_[static_cast<std::size_t>(p)];
  auto& classes = classes_[static_cast<std::size_t>(p)];
  table.assign(std::size_t{1} << m, kUnassigned);

  std::vector<int> perm(static_cast<std::size_t>(p));
  std::vector<std::uint32_t> stack;
  for (std::uint32_t seed = 0; seed < (1u << m); ++seed) {
    if (table[seed] != kUnassigned) continue;
    const int id = static_cast<int>(classes.size());
    if (id >= kUnassigned)
      throw ConfigError("class id overflow at order " + std::to_string(p));
    std::uint64_t orbit = 0;
    stack.assign(1, seed);
    table[seed] = static_cast<std::uint16_t>(id);
    while (!stack.empty()) {
      const std::uint32_t cur = stack.back();
      stack.pop_back();
      ++orbit;
      for (int t = 0; t + 1 < p; ++t) {
        for (int i = 0; i < p; ++i) perm[static_cast<std::size_t>(i)] = i;
        std::swap(perm[static_cast<std::size_t>(t)],
                  perm[static_cast<std::size_t>(t) + 1]);
        const std::uint32_t next = permute_code(EdgeCode{p, cur}, perm).bits;
        if (table[next] == kUnassigned) {
          table[next] = static_cast<std::uint16_t>(id);
          stack.push_back(next);
        }
      }
    }
    classes.push_back(GraphletClass{p, id, EdgeCode{p, seed}, orbit});
  }
}

void ClassRegistry::check_order(int p) const {
  if (p < 2 || p > max_order_)
    throw ConfigError("order " + std::to_string(p) +
                      " outside registry range [2, " +
                      std::to_string(max_order_) + "]");
}

int ClassRegistry::class_count(int p) const {
  check_order(p);
  if (!is_dense(p))
    throw ConfigError("order " + std::to_string(p) +
                      " has no dense class table");
  return static_cast<int>(classes_[static_cast<std::size_t>(p)].size());
}

const std::vector<GraphletClass>& ClassRegistry::classes(int p) const {
  check_order(p);
  if (!is_dense(p))
    throw ConfigError("order " + std::to_string(p) +
                      " has no dense class table");
  return classes_[static_cast<std::size_t>(p)];
}

int ClassRegistry::classify(EdgeCode code) const {
  const int p = code.order;
  check_order(p);
  if (is_dense(p)) return table_[static_cast<std::size_t>(p)][code.bits];

  const EdgeCode canon = canonical_min_code(code);
  std::lock_guard<std::mutex> lock(lazy_->mutex);
  auto& ids = lazy_->ids[static_cast<std::size_t>(p)];
  auto it = ids.find(canon.bits);
  if (it != ids.end()) return it->second;
  const int id = static_cast<int>(lazy_->classes[static_cast<std::size_t>(p)].size());
  ids.emplace(canon.bits, id);
  lazy_->classes[static_cast<std::size_t>(p)].push_back(GraphletClass{
      p, id, canon, factorial(p) / automorphism_count(canon)});
  return id;
}

GraphletClass ClassRegistry::class_info(int p, int class_id) const {
  check_order(p);
  if (is_dense(p)) {
    const auto& cls = classes_[static_cast<std::size_t>(p)];
    if (class_id < 0 || class_id >= static_cast<int>(cls.size()))
      throw ConfigError("class id out of range");
    return cls[static_cast<std::size_t>(class_id)];
  }
  std::lock_guard<std::mutex> lock(lazy_->mutex);
  const auto& cls = lazy_->classes[static_cast<std::size_t>(p)];
  if (class_id < 0 || class_id >= static_cast<int>(cls.size()))
    throw ConfigError("class id out of range");
  return cls[static_cast<std::size_t>(class_id)];
}

EdgeCode ClassRegistry::canonical_code(EdgeCode code) const {
  const int p = code.order;
  check_order(p);
  if (is_dense(p))
    return classes_[static_cast<std::size_t>(p)][table_[static_cast<std::size_t>(p)][code.bits]]
        .canonical;
  return canonical_min_code(code);
}

void ClassRegistry::dump(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.write("GMOE", 4);
  write_u32(os, 1);  // format version
  write_u32(os, 1);  // file kind: registry
  write_u32(os, static_cast<std::uint32_t>(max_order_));
  write_u32(os, static_cast<std::uint32_t>(max_dense_order_));
  for (int p = 2; p <= max_dense_order_; ++p) {
    const auto& cls = classes_[static_cast<std::size_t>(p)];
    write_u32(os, static_cast<std::uint32_t>(p));
    write_u32(os, static_cast<std::uint32_t>(cls.size()));
    for (const auto& c : cls) {
      write_u32(os, c.canonical.bits);
      write_u64(os, c.size);
    }
    const auto& table = table_[static_cast<std::size_t>(p)];
    write_u64(os, table.size());
    os.write(reinterpret_cast<const char*>(table.data()),
             static_cast<std::streamsize>(table.size() * sizeof(std::uint16_t)));
  }
  if (!os) throw DataError("failed to write " + path);
}

ClassRegistry ClassRegistry::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "GMOE", 4) != 0)
    throw DataError(path + ": bad magic");
  if (read_u32(is) != 1) throw DataError(path + ": unsupported format version");
  if (read_u32(is) != 1) throw DataError(path + ": not a registry file");
  ClassRegistry reg;
  reg.max_order_ = static_cast<int>(read_u32(is));
  reg.max_dense_order_ = static_cast<int>(read_u32(is));
  if (reg.max_order_ < 2 || reg.max_order_ > kMaxSupportedOrder ||
      reg.max_dense_order_ < 2 || reg.max_dense_order_ > reg.max_order_)
    throw DataError(path + ": inconsistent header");
  for (int p = 2; p <= reg.max_dense_order_; ++p) {
    if (static_cast<int>(read_u32(is)) != p)
      throw DataError(path + ": order sequence mismatch");
    const auto count = read_u32(is);
    auto& cls = reg.classes_[static_cast<std::size_t>(p)];
    cls.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      GraphletClass c;
      c.order = p;
      c.class_id = static_cast<int>(i);
      c.canonical = EdgeCode{p, read_u32(is)};
      c.size = read_u64(is);
      cls.push_back(c);
    }
    const auto table_len = read_u64(is);
    if (table_len != (std::uint64_t{1} << pair_count(p)))
      throw DataError(path + ": wrong table size");
    auto& table = reg.table_[static_cast<std::size_t>(p)];
    table.resize(table_len);
    is.read(reinterpret_cast<char*>(table.data()),
            static_cast<std::streamsize>(table_len * sizeof(std::uint16_t)));
  }
  if (!is) throw DataError(path + ": truncated file");
  return reg;
}

}  // namespace gmoe
