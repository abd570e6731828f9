#include "rediffuse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "rediffuse/io.hpp"
#include "rediffuse/parallel.hpp"
#include "rediffuse/rng.hpp"

namespace rediffuse {

using nlohmann::json;

const ImageTensor& Dataset::sample(size_t i) const {
  ++access_count_[i];
  return samples[i];
}

void Dataset::reset_access_counts() const {
  std::fill(access_count_.begin(), access_count_.end(), 0);
}

void Dataset::init_counters() const {
  access_count_.assign(samples.size(), 0);
}

Dataset gen_gmm_dataset(size_t n, size_t d, size_t K, uint64_t seed,
                        double sigma) {
  if (n == 0 || d == 0 || K == 0)
    throw std::invalid_argument("gmm dataset: n, d, K must be >= 1");
  if (sigma < 0.0) throw std::invalid_argument("gmm dataset: sigma < 0");

  // Component means on a coarse lattice, interior to the cube.
  Rng mean_rng(derive_seed(seed, 0, 0));
  std::vector<std::vector<double>> means(K, std::vector<double>(d));
  for (size_t k = 0; k < K; ++k)
    for (size_t j = 0; j < d; ++j)
      means[k][j] = double(1 + mean_rng.next_below(8)) / 9.0;

  Dataset ds;
  ds.kind = "gmm";
  ds.seed = seed;
  ds.samples.assign(n, ImageTensor({uint32_t(d)}));
  par::for_each_index(n, [&](size_t i) {
    Rng rng(derive_seed(seed, i + 1, 0));
    size_t k = size_t(rng.next_below(K));
    ImageTensor& x = ds.samples[i];
    for (size_t j = 0; j < d; ++j) {
      double v = means[k][j] + sigma * double(rng.next_normal());
      x.data[j] = float(std::clamp(v, 0.0, 1.0));
    }
  });
  ds.init_counters();
  return ds;
}

namespace {

bool inside_shape(const ShapeDescriptor& s, int r, int c) {
  int dr = r - s.cy, dc = c - s.cx;
  if (s.kind == "rect") return std::abs(dr) <= s.b && std::abs(dc) <= s.a;
  if (s.kind == "disc") return dr * dr + dc * dc <= s.a * s.a;
  // cross: horizontal bar plus vertical bar
  return (std::abs(dr) <= s.b && std::abs(dc) <= s.a) ||
         (std::abs(dc) <= s.b && std::abs(dr) <= s.a);
}

float texture_value(const ShapeDescriptor& s, int r, int c) {
  if (s.texture == "solid") return s.fill;
  if (s.texture == "stripes")
    return (c / s.stripe_width) % 2 == 0 ? s.fill : s.fill2;
  // checker
  return ((r / s.stripe_width) + (c / s.stripe_width)) % 2 == 0 ? s.fill
                                                                : s.fill2;
}

ShapeDescriptor random_shape(Rng& rng, uint32_t side) {
  ShapeDescriptor s;
  int smax = int(side) / 4;
  switch (rng.next_below(3)) {
    case 0: s.kind = "rect"; break;
    case 1: s.kind = "disc"; break;
    default: s.kind = "cross"; break;
  }
  s.a = 2 + int(rng.next_below(uint64_t(smax - 1)));
  if (s.kind == "rect") {
    s.b = 2 + int(rng.next_below(uint64_t(smax - 1)));
  } else if (s.kind == "cross") {
    s.b = 1 + int(rng.next_below(uint64_t(std::min(s.a - 1, 2))));
  } else {
    s.b = 0;
  }
  int reach = std::max(s.a, s.b);
  s.cx = reach + int(rng.next_below(uint64_t(int(side) - 2 * reach)));
  s.cy = reach + int(rng.next_below(uint64_t(int(side) - 2 * reach)));
  s.fill = float(0.5 + 0.5 * rng.next_double());
  return s;
}

json descriptor_to_json(const ShapeDescriptor& s) {
  return json{{"kind", s.kind},
              {"cx", s.cx},
              {"cy", s.cy},
              {"a", s.a},
              {"b", s.b},
              {"fill", double(s.fill)},
              {"texture", s.texture},
              {"stripe_width", s.stripe_width},
              {"fill2", double(s.fill2)}};
}

ShapeDescriptor descriptor_from_json(const json& j) {
  ShapeDescriptor s;
  s.kind = j.at("kind").get<std::string>();
  s.cx = j.at("cx").get<int>();
  s.cy = j.at("cy").get<int>();
  s.a = j.at("a").get<int>();
  s.b = j.at("b").get<int>();
  s.fill = float(j.at("fill").get<double>());
  s.texture = j.at("texture").get<std::string>();
  s.stripe_width = j.at("stripe_width").get<int>();
  s.fill2 = float(j.at("fill2").get<double>());
  return s;
}

}  // namespace

ImageTensor render_shape(const ShapeDescriptor& desc, uint32_t side) {
  ImageTensor img({side, side});
  for (int r = 0; r < int(side); ++r)
    for (int c = 0; c < int(side); ++c)
      if (inside_shape(desc, r, c))
        img.data[size_t(r) * side + size_t(c)] = texture_value(desc, r, c);
  return img;
}

Dataset gen_shape_dataset(size_t n, uint32_t side, uint64_t seed) {
  if (n == 0) throw std::invalid_argument("shape dataset: n must be >= 1");
  if (side < 8) throw std::invalid_argument("shape dataset: side must be >= 8");
  Dataset ds;
  ds.kind = "shapes";
  ds.seed = seed;
  ds.samples.assign(n, ImageTensor({side, side}));
  ds.descriptors.resize(n);
  par::for_each_index(n, [&](size_t i) {
    Rng rng(derive_seed(seed, i, 0));
    ds.descriptors[i] = random_shape(rng, side);
    ds.samples[i] = render_shape(ds.descriptors[i], side);
  });
  ds.init_counters();
  return ds;
}

Dataset style_shift(const Dataset& ds, uint64_t seed) {
  if (ds.descriptors.size() != ds.samples.size() || ds.samples.empty())
    throw std::invalid_argument("style_shift: dataset has no descriptors");
  uint32_t side = ds.samples[0].shape[0];
  Dataset out;
  out.kind = "style_shift";
  out.seed = seed;
  out.samples.assign(ds.size(), ImageTensor({side, side}));
  out.descriptors.resize(ds.size());
  par::for_each_index(ds.size(), [&](size_t i) {
    Rng rng(derive_seed(seed, i, 0));
    ShapeDescriptor s = ds.descriptors[i];
    s.texture = rng.next_below(2) == 0 ? "stripes" : "checker";
    s.stripe_width = 2;
    // Tones straddle the original fill, so the shape keeps roughly its mean
    // intensity and the mask binarizes identically while every image changes
    // somewhere.
    s.fill2 = 0.8f * s.fill;
    s.fill = std::min(1.0f, 1.2f * s.fill);
    out.descriptors[i] = s;
    out.samples[i] = render_shape(s, side);
  });
  out.init_counters();
  return out;
}

MembershipSplit split_members(const Dataset& ds, uint64_t seed) {
  size_t n = ds.size();
  if (n == 0) throw std::invalid_argument("split: empty dataset");
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(derive_seed(seed, n, 0));
  for (size_t i = n - 1; i > 0; --i) {
    size_t j = size_t(rng.next_below(i + 1));
    std::swap(idx[i], idx[j]);
  }
  MembershipSplit split;
  size_t half = n / 2;
  split.members.assign(idx.begin(), idx.begin() + ptrdiff_t(half));
  split.nonmembers.assign(idx.begin() + ptrdiff_t(half), idx.end());
  std::sort(split.members.begin(), split.members.end());
  std::sort(split.nonmembers.begin(), split.nonmembers.end());
  return split;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds,
                  const MembershipSplit& split) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["kind"] = ds.kind;
  manifest["seed"] = ds.seed;
  manifest["n"] = ds.size();
  manifest["members"] = split.members;
  manifest["nonmembers"] = split.nonmembers;
  json descs = json::array();
  for (const auto& d : ds.descriptors) descs.push_back(descriptor_to_json(d));
  manifest["descriptors"] = std::move(descs);
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  char name[32];
  for (size_t i = 0; i < ds.size(); ++i) {
    std::snprintf(name, sizeof(name), "sample_%05zu.tnsr", i);
    write_tensor(dir / name, ds.samples[i]);
  }
}

std::pair<Dataset, MembershipSplit> load_dataset(
    const std::filesystem::path& dir) {
  json manifest = json::parse(read_text_file(dir / "manifest.json"));
  Dataset ds;
  ds.kind = manifest.at("kind").get<std::string>();
  ds.seed = manifest.at("seed").get<uint64_t>();
  size_t n = manifest.at("n").get<size_t>();
  for (const auto& j : manifest.at("descriptors"))
    ds.descriptors.push_back(descriptor_from_json(j));
  char name[32];
  ds.samples.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    std::snprintf(name, sizeof(name), "sample_%05zu.tnsr", i);
    ds.samples.push_back(read_tensor(dir / name));
  }
  ds.init_counters();
  MembershipSplit split;
  split.members = manifest.at("members").get<std::vector<size_t>>();
  split.nonmembers = manifest.at("nonmembers").get<std::vector<size_t>>();
  return {std::move(ds), std::move(split)};
}

}  // namespace rediffuse
