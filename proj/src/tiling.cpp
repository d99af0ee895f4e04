#include "hiercls/tiling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hiercls/errors.hpp"
#include "hiercls/random.hpp"

namespace hiercls {

namespace {

double signed_ring_area(const Ring& r) {
  double a = 0.0;
  for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) a += r[j].x * r[i].y - r[i].x * r[j].y;
  return 0.5 * a;
}

// x where edge (a, b) crosses the horizontal line at y; caller guarantees a crossing.
double crossing_x(const Point& a, const Point& b, double y) { return (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x; }

bool crosses(const Point& a, const Point& b, double y) { return (a.y > y) != (b.y > y); }

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t read_u32(const std::string& in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}

void append_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

double read_f64(const std::string& in, std::size_t off) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

constexpr char kPatchMagic[] = "HCPATCH1";

}  // namespace

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (auto b : bits) n += b;
  return n;
}

void validate_polygon(const PolygonObject& p) {
  if (p.rings.empty()) throw ValidationError("polygon '" + p.id + "' has no rings");
  for (const auto& r : p.rings) {
    if (r.size() < 3) throw ValidationError("polygon '" + p.id + "' has a ring with fewer than 3 vertices");
    for (const auto& q : r)
      if (!std::isfinite(q.x) || !std::isfinite(q.y))
        throw ValidationError("polygon '" + p.id + "' has a non-finite coordinate");
  }
  if (!(polygon_area(p) > 0.0)) throw ValidationError("polygon '" + p.id + "' has zero area");
}

BBox bounding_box(const PolygonObject& p) {
  BBox b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const auto& r : p.rings)
    for (const auto& q : r) {
      b.min_x = std::min(b.min_x, q.x);
      b.min_y = std::min(b.min_y, q.y);
      b.max_x = std::max(b.max_x, q.x);
      b.max_y = std::max(b.max_y, q.y);
    }
  return b;
}

double polygon_area(const PolygonObject& p) {
  if (p.rings.empty()) return 0.0;
  double a = std::abs(signed_ring_area(p.rings.front()));
  for (std::size_t k = 1; k < p.rings.size(); ++k) a -= std::abs(signed_ring_area(p.rings[k]));
  return a;
}

Point centroid(const PolygonObject& p) {
  double sx = 0.0, sy = 0.0, total = 0.0;
  for (std::size_t k = 0; k < p.rings.size(); ++k) {
    const Ring& r = p.rings[k];
    const double a = signed_ring_area(r);
    if (a == 0.0) continue;
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
      const double cross = r[j].x * r[i].y - r[i].x * r[j].y;
      cx += (r[j].x + r[i].x) * cross;
      cy += (r[j].y + r[i].y) * cross;
    }
    cx /= 6.0 * a;
    cy /= 6.0 * a;
    const double w = k == 0 ? std::abs(a) : -std::abs(a);
    sx += w * cx;
    sy += w * cy;
    total += w;
  }
  if (total == 0.0) throw ValidationError("polygon '" + p.id + "' has zero area");
  return {sx / total, sy / total};
}

ObjectWindow object_window(const PolygonObject& p, int window) {
  validate_polygon(p);
  ObjectWindow w;
  w.bbox = bounding_box(p);
  w.fits = w.bbox.width() <= window && w.bbox.height() <= window;
  const Point c = centroid(p);
  w.origin = {static_cast<std::int64_t>(std::floor(c.x - window / 2.0)),
              static_cast<std::int64_t>(std::floor(c.y - window / 2.0))};
  return w;
}

std::vector<PixelOrigin> candidate_origins(const BBox& box, int window, int stride) {
  auto axis = [&](double lo_d, double hi_d) {
    const auto lo = static_cast<std::int64_t>(std::floor(lo_d));
    const auto hi = static_cast<std::int64_t>(std::ceil(hi_d));
    const std::int64_t extent = hi - lo;
    std::vector<std::int64_t> out;
    if (extent <= window) {
      out.push_back(lo + static_cast<std::int64_t>(std::floor((extent - window) / 2.0)));
      return out;
    }
    const std::int64_t n = (extent - window + stride - 1) / stride + 1;
    for (std::int64_t k = 0; k + 1 < n; ++k) out.push_back(lo + k * stride);
    out.push_back(hi - window);
    return out;
  };
  const auto xs = axis(box.min_x, box.max_x);
  const auto ys = axis(box.min_y, box.max_y);
  std::vector<PixelOrigin> out;
  out.reserve(xs.size() * ys.size());
  for (auto y : ys)
    for (auto x : xs) out.push_back({x, y});
  return out;
}

std::size_t retained_count(std::size_t n) {
  if (n <= kMinTilesBeforeSampling) return n;
  return (n * kRetainPercent + 99) / 100;
}

TilingResult tile_object(const PolygonObject& p, std::uint64_t rng_seed) {
  const ObjectWindow w = object_window(p);
  TilingResult result;
  const double area = static_cast<double>(kPatchSize) * kPatchSize;
  if (w.fits) {
    TileSpec t;
    t.origin = w.origin;
    t.mask = rasterize_mask(p, t.origin);
    t.overlap_fraction = static_cast<double>(t.mask.count()) / area;
    result.candidate_count = result.after_filter_count = 1;
    result.tiles.push_back(std::move(t));
    return result;
  }
  const auto origins = candidate_origins(w.bbox);
  result.candidate_count = origins.size();
  std::vector<TileSpec> kept;
  for (const auto& o : origins) {
    TileSpec t;
    t.origin = o;
    t.mask = rasterize_mask(p, o);
    t.overlap_fraction = static_cast<double>(t.mask.count()) / area;
    if (t.overlap_fraction >= kMinTileOverlap) kept.push_back(std::move(t));
  }
  result.after_filter_count = kept.size();
  const std::size_t keep = retained_count(kept.size());
  if (keep == kept.size()) {
    result.tiles = std::move(kept);
    return result;
  }
  // Partial Fisher-Yates: the first `keep` slots form a uniform sample.
  Rng rng(rng_seed);
  std::vector<std::size_t> idx(kept.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < keep; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  for (auto i : idx) result.tiles.push_back(std::move(kept[i]));
  return result;
}

std::vector<TileSpec> compute_tiles(const PolygonObject& p, std::uint64_t rng_seed) {
  return tile_object(p, rng_seed).tiles;
}

bool point_in_polygon(const PolygonObject& p, Point q) {
  bool inside = false;
  for (const auto& r : p.rings)
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++)
      if (crosses(r[j], r[i], q.y) && q.x < crossing_x(r[j], r[i], q.y)) inside = !inside;
  return inside;
}

BinaryMask rasterize_mask_serial(const PolygonObject& p, PixelOrigin origin, int size) {
  validate_polygon(p);
  BinaryMask m{size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size, 0)};
  for (int r = 0; r < size; ++r) {
    const double y = static_cast<double>(origin.y) + r + 0.5;
    for (int c = 0; c < size; ++c) {
      const double x = static_cast<double>(origin.x) + c + 0.5;
      m.bits[static_cast<std::size_t>(r) * size + c] = point_in_polygon(p, {x, y});
    }
  }
  return m;
}

BinaryMask rasterize_mask(const PolygonObject& p, PixelOrigin origin, int size) {
  validate_polygon(p);
  BinaryMask m{size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size, 0)};
  const BBox box = bounding_box(p);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < size; ++r) {
    const double y = static_cast<double>(origin.y) + r + 0.5;
    if (y < box.min_y || y > box.max_y) continue;
    std::vector<double> xs;
    for (const auto& ring : p.rings)
      for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
        if (crosses(ring[j], ring[i], y)) xs.push_back(crossing_x(ring[j], ring[i], y));
    std::sort(xs.begin(), xs.end());
    // Pixel is inside iff an odd number of crossings lie strictly to its right,
    // i.e. the count of crossings <= x is odd (xs.size() is even).
    std::size_t le = 0;
    auto* row = m.bits.data() + static_cast<std::size_t>(r) * size;
    for (int c = 0; c < size; ++c) {
      const double x = static_cast<double>(origin.x) + c + 0.5;
      while (le < xs.size() && xs[le] <= x) ++le;
      row[c] = ((xs.size() - le) & 1u) != 0;
    }
  }
  return m;
}

PatchStack assemble_patch(const BinaryMask& mask, const std::array<Band, 4>& spectral, const Band& height,
                          const std::vector<Band>& lc_scores) {
  const int n = mask.size;
  auto check = [n](const Band& b, const char* what) {
    if (b.size != n || b.values.size() != static_cast<std::size_t>(n) * n)
      throw std::invalid_argument(std::string("assemble_patch: ") + what + " band has the wrong shape");
  };
  for (const auto& b : spectral) check(b, "spectral");
  check(height, "height");
  for (const auto& b : lc_scores) check(b, "land-cover");
  PatchStack p;
  Band m(n);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) m.values[i] = mask.bits[i] ? 1.0 : 0.0;
  p.bands.push_back(std::move(m));
  for (const auto& b : spectral) p.bands.push_back(b);
  p.bands.push_back(height);
  for (const auto& b : lc_scores) p.bands.push_back(b);
  return p;
}

std::string serialize_patch(const PatchStack& p) {
  std::string out(kPatchMagic, 8);
  const auto n = p.bands.empty() ? 0u : static_cast<std::uint32_t>(p.bands.front().size);
  append_u32(out, static_cast<std::uint32_t>(p.bands.size()));
  append_u32(out, n);
  append_u32(out, n);
  for (const auto& b : p.bands)
    for (double v : b.values) append_f64(out, v);
  return out;
}

PatchStack parse_patch(const std::string& bytes) {
  if (bytes.size() < 20 || bytes.compare(0, 8, kPatchMagic) != 0) throw ValidationError("not a patch dump");
  const auto d = read_u32(bytes, 8);
  const auto rows = read_u32(bytes, 12);
  const auto cols = read_u32(bytes, 16);
  if (rows != cols) throw ValidationError("patch dump: non-square planes are not supported");
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  if (bytes.size() != 20 + 8 * plane * d) throw ValidationError("patch dump: size does not match header");
  PatchStack p;
  std::size_t off = 20;
  for (std::uint32_t k = 0; k < d; ++k) {
    Band b(static_cast<int>(rows));
    for (double& v : b.values) {
      v = read_f64(bytes, off);
      off += 8;
    }
    p.bands.push_back(std::move(b));
  }
  return p;
}

FeatureGrid roi_extract(const FeatureGrid& grid, const CellBox& box, int out_size) {
  if (box.width <= 0 || box.height <= 0) throw std::invalid_argument("roi_extract: empty box");
  if (box.x < 0 || box.y < 0 || box.x + box.width > grid.width || box.y + box.height > grid.height)
    throw std::invalid_argument("roi_extract: box outside the grid");
  if (out_size <= 0) throw std::invalid_argument("roi_extract: output size must be positive");
  FeatureGrid out(out_size, out_size, grid.channels);
  const double denom = out_size > 1 ? static_cast<double>(out_size - 1) : 1.0;
  for (int i = 0; i < out_size; ++i) {
    const double sy = box.y + i * static_cast<double>(box.height - 1) / denom;
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, box.y + box.height - 1);
    const double fy = sy - y0;
    for (int j = 0; j < out_size; ++j) {
      const double sx = box.x + j * static_cast<double>(box.width - 1) / denom;
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, box.x + box.width - 1);
      const double fx = sx - x0;
      for (int f = 0; f < grid.channels; ++f) {
        const double top = (1.0 - fx) * grid.at(y0, x0, f) + fx * grid.at(y0, x1, f);
        const double bottom = (1.0 - fx) * grid.at(y1, x0, f) + fx * grid.at(y1, x1, f);
        out.at(i, j, f) = fy == 0.0 ? top : (1.0 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

std::vector<PolygonObject> parse_polygons(const std::string& text) {
  std::vector<PolygonObject> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw ParseError(line_no, "expected id<TAB>label<TAB>rings");
    PolygonObject p;
    p.id = line.substr(0, t1);
    const std::string label = line.substr(t1 + 1, t2 - t1 - 1);
    if (label != "-") p.label = label;
    std::istringstream rings(line.substr(t2 + 1));
    std::string ring_text;
    while (std::getline(rings, ring_text, '|')) {
      Ring r;
      std::istringstream verts(ring_text);
      std::string v;
      while (verts >> v) {
        const auto comma = v.find(',');
        if (comma == std::string::npos) throw ParseError(line_no, "vertex '" + v + "' is not x,y");
        try {
          std::size_t ux = 0, uy = 0;
          const std::string xs = v.substr(0, comma), ys = v.substr(comma + 1);
          const double x = std::stod(xs, &ux);
          const double y = std::stod(ys, &uy);
          if (ux != xs.size() || uy != ys.size()) throw std::invalid_argument("trailing");
          r.push_back({x, y});
        } catch (const std::exception&) {
          throw ParseError(line_no, "invalid vertex '" + v + "'");
        }
      }
      p.rings.push_back(std::move(r));
    }
    try {
      validate_polygon(p);
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PolygonObject> load_polygons(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open polygon file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_polygons(ss.str());
}

std::string serialize_polygons(const std::vector<PolygonObject>& objects) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& p : objects) {
    out << p.id << '\t' << p.label.value_or("-") << '\t';
    for (std::size_t k = 0; k < p.rings.size(); ++k) {
      if (k) out << '|';
      for (std::size_t i = 0; i < p.rings[k].size(); ++i) {
        if (i) out << ' ';
        out << p.rings[k][i].x << ',' << p.rings[k][i].y;
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace hiercls
