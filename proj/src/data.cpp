#include "xcsf/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "xcsf/binary_io.hpp"

namespace xcsf {

std::uint64_t Dataset::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        h = fnv1a(buf, h);
    };
    mix(rows);
    mix(n);
    for (double v : features) mix(std::bit_cast<std::uint64_t>(v));
    return h;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r\"");
        const auto e = cell.find_last_not_of(" \t\r\"");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    auto [p, ec] = std::from_chars(begin, s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

void scale_unit(std::vector<double>& v) {
    if (v.empty()) return;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double min = *lo, max = *hi;
    if (min >= 0.0 && max <= 1.0) return;
    if (min >= 0.0) {
        for (auto& x : v) x /= max;
        return;
    }
    const double range = max - min;
    for (auto& x : v) x = range > 0.0 ? (x - min) / range : 0.0;
}

}  // namespace

Dataset parse_csv(const std::string& text, bool has_label_column) {
    Dataset ds;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto cells = split_cells(line);
        if (first) {
            first = false;
            const bool header = std::any_of(cells.begin(), cells.end(), [](const std::string& c) {
                double d;
                return !parse_number(c, d);
            });
            if (header) continue;
        }
        if (has_label_column) {
            if (cells.size() < 2) throw DataError("line " + std::to_string(lineno) + ": no feature columns");
            cells.pop_back();
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                            " columns, found " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!parse_number(cells[c], v) || !std::isfinite(v))
                throw DataError("line " + std::to_string(lineno) + ", column " + std::to_string(c + 1) +
                                ": invalid numeric cell '" + cells[c] + "'");
            ds.features.push_back(v);
        }
        ++ds.rows;
    }
    if (ds.rows == 0 || width == 0) throw DataError("dataset contains no data rows");
    ds.n = width;
    scale_unit(ds.features);
    return ds;
}

Dataset load_csv(const std::string& path, bool has_label_column) {
    return parse_csv(read_file(path), has_label_column);
}

Dataset parse_idx(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw DataError("IDX file truncated in header");
    const auto be32 = [&](std::size_t off) {
        return (std::uint32_t{bytes[off]} << 24) | (std::uint32_t{bytes[off + 1]} << 16) |
               (std::uint32_t{bytes[off + 2]} << 8) | std::uint32_t{bytes[off + 3]};
    };
    const std::uint32_t magic = be32(0);
    if (magic != 0x00000803u)
        throw DataError("unsupported IDX magic (expected 0x00000803 for a uint8 image tensor)");
    if (bytes.size() < 16) throw DataError("IDX file truncated in header");
    const std::size_t count = be32(4), height = be32(8), width = be32(12);
    const std::size_t n = height * width;
    if (count == 0 || n == 0) throw DataError("IDX file has an empty dimension");
    if (bytes.size() - 16 < count * n) throw DataError("IDX payload truncated");

    Dataset ds;
    ds.rows = count;
    ds.n = n;
    ds.image_shape = ImageShape{height, width, 1};
    ds.features.resize(count * n);
    for (std::size_t i = 0; i < count * n; ++i) ds.features[i] = bytes[16 + i] / 255.0;
    return ds;
}

Dataset load_idx(const std::string& path) {
    const std::string raw = read_file(path);
    return parse_idx({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
}

Dataset load_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset.empty()) throw DataError("no dataset configured");
    DataFormat fmt = cfg.dataset_format;
    if (fmt == DataFormat::Auto) {
        const auto ext = std::filesystem::path(cfg.dataset).extension().string();
        fmt = (ext == ".csv" || ext == ".txt") ? DataFormat::Csv : DataFormat::Idx;
    }
    Dataset ds = fmt == DataFormat::Csv ? load_csv(cfg.dataset, cfg.has_label_column)
                                        : load_idx(cfg.dataset);
    if (cfg.image_shape) {
        if (cfg.image_shape->size() != ds.n)
            throw DataError("image_shape does not match the dataset feature count");
        ds.image_shape = cfg.image_shape;
    }
    return ds;
}

void split(Dataset& ds, double ratio, Rng& rng) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("split ratio must be in (0, 1]");
    std::vector<std::size_t> idx(ds.rows);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Fisher-Yates with the portable generator.
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ds.rows)));
    ds.train_idx.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.valid_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
}

std::vector<double> salt_pepper(std::span<const double> x, double fraction, Rng& rng) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("noise fraction must be in [0, 1]");
    std::vector<double> out(x.begin(), x.end());
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(x.size())));
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates picks k distinct positions.
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
        out[idx[i]] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    return out;
}

std::vector<double> cutout_at(std::span<const double> x, const ImageShape& shape, std::size_t top,
                              std::size_t left, std::size_t h, std::size_t w) {
    if (shape.size() != x.size()) throw DataError("image shape does not match vector length");
    std::vector<double> out(x.begin(), x.end());
    const std::size_t plane = shape.height * shape.width;
    for (std::size_t c = 0; c < shape.channels; ++c)
        for (std::size_t r = top; r < std::min(top + h, shape.height); ++r)
            for (std::size_t q = left; q < std::min(left + w, shape.width); ++q)
                out[c * plane + r * shape.width + q] = 0.0;
    return out;
}

std::vector<double> cutout(std::span<const double> x, const std::optional<ImageShape>& shape,
                           Rng& rng, const CutoutOptions& opts) {
    if (!shape) throw DataError("cutout requires an image shape");
    auto side = [&](std::size_t full) {
        const auto lo = static_cast<std::size_t>(std::ceil(opts.min_side * static_cast<double>(full)));
        const auto hi = static_cast<std::size_t>(std::floor(opts.max_side * static_cast<double>(full)));
        if (hi <= lo) return std::min(lo, full);
        return lo + rng.uniform_index(hi - lo + 1);
    };
    const std::size_t h = side(shape->height);
    const std::size_t w = side(shape->width);
    const std::size_t top = rng.uniform_index(shape->height - h + 1);
    const std::size_t left = rng.uniform_index(shape->width - w + 1);
    return cutout_at(x, *shape, top, left, h, w);
}

}  // namespace xcsf
