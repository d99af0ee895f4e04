#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hiercls {

inline constexpr int kPatchSize = 256;
inline constexpr int kTileStride = 128;
inline constexpr double kMinTileOverlap = 0.10;
inline constexpr std::size_t kMinTilesBeforeSampling = 3;  // N_min
inline constexpr int kRetainPercent = 40;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Ring = std::vector<Point>;

// Rings are implicitly closed. Inside is decided by the even-odd rule over all
// rings, so additional rings act as holes.
struct PolygonObject {
  std::string id;
  std::vector<Ring> rings;
  std::optional<std::string> label;  // finest-level class name
};

struct BBox {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

struct PixelOrigin {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const PixelOrigin&, const PixelOrigin&) = default;
};

// Square binary grid, row-major, rows along y.
struct BinaryMask {
  int size = 0;
  std::vector<std::uint8_t> bits;
  std::uint8_t at(int row, int col) const { return bits[static_cast<std::size_t>(row) * size + col]; }
  std::size_t count() const;
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct TileSpec {
  PixelOrigin origin;
  BinaryMask mask;
  double overlap_fraction = 0.0;  // ones / (size * size)
};

// Throws ValidationError for rings with fewer than 3 vertices, non-finite
// coordinates or zero total area.
void validate_polygon(const PolygonObject& p);
BBox bounding_box(const PolygonObject& p);
double polygon_area(const PolygonObject& p);  // even-odd area: |outer| - |holes|
Point centroid(const PolygonObject& p);

struct ObjectWindow {
  bool fits = false;
  BBox bbox;
  PixelOrigin origin;  // window centred at the centroid; meaningful when fits
};

ObjectWindow object_window(const PolygonObject& p, int window = kPatchSize);

// Candidate window origins of the stride-128 grid over the bounding box; the
// last row and column are clamped to the box. A box extent below the window
// size gets a single window centred on the box along that axis.
std::vector<PixelOrigin> candidate_origins(const BBox& box, int window = kPatchSize, int stride = kTileStride);

struct TilingResult {
  std::size_t candidate_count = 0;
  std::size_t after_filter_count = 0;
  std::vector<TileSpec> tiles;  // retained tiles, in grid order
};

TilingResult tile_object(const PolygonObject& p, std::uint64_t rng_seed);
std::vector<TileSpec> compute_tiles(const PolygonObject& p, std::uint64_t rng_seed);
// ceil(0.4 * n) for n > N_min, else n.
std::size_t retained_count(std::size_t n);

// Pixel (row, col) is set iff its centre (origin + (col + .5, row + .5)) lies
// inside the polygon. Scanline fill, rows distributed over OpenMP threads.
BinaryMask rasterize_mask(const PolygonObject& p, PixelOrigin origin, int size = kPatchSize);
// Per-pixel even-odd crossing test; reference for rasterize_mask.
BinaryMask rasterize_mask_serial(const PolygonObject& p, PixelOrigin origin, int size = kPatchSize);
bool point_in_polygon(const PolygonObject& p, Point q);

// size x size plane of doubles, row-major.
struct Band {
  int size = 0;
  std::vector<double> values;
  explicit Band(int n = 0, double fill = 0.0) : size(n), values(static_cast<std::size_t>(n) * n, fill) {}
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * size + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * size + c]; }
  friend bool operator==(const Band&, const Band&) = default;
};

// Bands ordered mask, R, G, B, IR, height, then the land-cover score bands.
struct PatchStack {
  std::vector<Band> bands;
  std::size_t band_count() const { return bands.size(); }
  std::size_t land_cover_bands() const { return bands.size() - 6; }
  friend bool operator==(const PatchStack&, const PatchStack&) = default;
};

PatchStack assemble_patch(const BinaryMask& mask, const std::array<Band, 4>& spectral, const Band& height,
                          const std::vector<Band>& lc_scores);

// Patch dump: magic "HCPATCH1", uint32 D, uint32 rows, uint32 cols (little
// endian), then D row-major planes of little-endian float64.
std::string serialize_patch(const PatchStack& p);
PatchStack parse_patch(const std::string& bytes);

// Feature grid of H x W cells with F channels, stored (row, col, channel).
struct FeatureGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;
  FeatureGrid() = default;
  FeatureGrid(int h, int w, int f, double fill = 0.0)
      : height(h), width(w), channels(f), values(static_cast<std::size_t>(h) * w * f, fill) {}
  double& at(int r, int c, int f) { return values[(static_cast<std::size_t>(r) * width + c) * channels + f]; }
  double at(int r, int c, int f) const { return values[(static_cast<std::size_t>(r) * width + c) * channels + f]; }
};

struct CellBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

// Bilinear resampling of the box to out_size x out_size with aligned corners:
// output (i, j) samples the box at (y + i (h-1)/(n-1), x + j (w-1)/(n-1)).
FeatureGrid roi_extract(const FeatureGrid& grid, const CellBox& box, int out_size = 16);

// Polygon file: one object per line, `id<TAB>label<TAB>rings`, label '-' when
// unknown, rings separated by '|', vertices by spaces, coordinates as `x,y`.
std::vector<PolygonObject> parse_polygons(const std::string& text);
std::vector<PolygonObject> load_polygons(const std::string& path);
std::string serialize_polygons(const std::vector<PolygonObject>& objects);

}  // namespace hiercls
