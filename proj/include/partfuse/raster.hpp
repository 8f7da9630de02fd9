#pragma once

#include "partfuse/align.hpp"
#include "partfuse/common.hpp"
#include "partfuse/crops.hpp"
#include "partfuse/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace partfuse {

/// 8-bit raster, interleaved channels, row-major.
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 1;

    std::vector<std::uint8_t> data;

    Raster() = default;
    Raster(int w, int h, int c)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c)) {}

    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + static_cast<std::size_t>(c)];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + static_cast<std::size_t>(c)];
    }
};

/// Fill policy for crop area outside the image.
enum class PadFill { replicate, black };

namespace detail {

/// Bilinear sample at continuous image coordinates where pixel (i, j) has
/// its center at (j + 0.5, i + 0.5). Coordinates outside the image replicate
/// the edge pixels.
inline double sample_bilinear(const Raster& img, double x, double y, int c) {
    double gx = x - 0.5;
    double gy = y - 0.5;
    double fx0 = std::floor(gx);
    double fy0 = std::floor(gy);
    double tx = gx - fx0;
    double ty = gy - fy0;
    auto clampx = [&](double v) { return std::clamp(static_cast<int>(v), 0, img.width - 1); };
    auto clampy = [&](double v) { return std::clamp(static_cast<int>(v), 0, img.height - 1); };
    int x0 = clampx(fx0), x1 = clampx(fx0 + 1);
    int y0 = clampy(fy0), y1 = clampy(fy0 + 1);
    double v00 = img.at(x0, y0, c), v10 = img.at(x1, y0, c);
    double v01 = img.at(x0, y1, c), v11 = img.at(x1, y1, c);
    double top = v00 + tx * (v10 - v00);
    double bot = v01 + tx * (v11 - v01);
    return top + ty * (bot - top);
}

inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

} // namespace detail

/**
 * Resamples the crop box to a resize_to x resize_to raster. Out-of-image
 * area follows the fill policy (default: edge replication, which avoids
 * feeding artificial borders to embedding providers). Square part crops
 * resample isotropically; the anisotropic stretch of the facial thirds
 * falls out of the same mapping since their boxes are not square.
 */
inline Raster extract_pixels(const Raster& img, const RegionCrop& crop,
                             PadFill fill = PadFill::replicate) {
    const Box& b = crop.box;
    if (b.x1 <= 0 || b.y1 <= 0 || b.x0 >= img.width || b.y0 >= img.height) {
        fail(Errc::empty_intersection, "crop box entirely outside the image");
    }
    int n = crop.resize_to;
    Raster out(n, n, img.channels);
    double sx = b.width() / n;
    double sy = b.height() / n;
    for (int oy = 0; oy < n; ++oy) {
        double y = b.y0 + (oy + 0.5) * sy;
        for (int ox = 0; ox < n; ++ox) {
            double x = b.x0 + (ox + 0.5) * sx;
            bool outside = fill == PadFill::black &&
                           (x < 0.0 || y < 0.0 || x > img.width || y > img.height);
            for (int c = 0; c < img.channels; ++c) {
                out.at(ox, oy, c) =
                    outside ? 0 : detail::to_byte(detail::sample_bilinear(img, x, y, c));
            }
        }
    }
    return out;
}

/// Warps the image through the similarity transform (inverse-mapped bilinear
/// resampling, edge replication), keeping the input dimensions.
inline Raster warp_similarity(const Raster& img, const AlignmentTransform& t) {
    AlignmentTransform inv = t.inverse();
    Raster out(img.width, img.height, img.channels);
    for (int oy = 0; oy < img.height; ++oy) {
        for (int ox = 0; ox < img.width; ++ox) {
            Vec2 src = inv({ox + 0.5, oy + 0.5});
            for (int c = 0; c < img.channels; ++c) {
                out.at(ox, oy, c) = detail::to_byte(detail::sample_bilinear(img, src.x, src.y, c));
            }
        }
    }
    return out;
}

/// BT.601 luma conversion; single-channel input passes through.
inline Raster to_grayscale(const Raster& img) {
    if (img.channels == 1) return img;
    if (img.channels != 3) fail(Errc::io_failure, "grayscale conversion expects 1 or 3 channels");
    Raster out(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double v = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
            out.at(x, y) = detail::to_byte(v);
        }
    }
    return out;
}

// --- binary netpbm (P5/P6), the library's own raster file format ---

inline std::string format_pnm(const Raster& img) {
    if (img.channels != 1 && img.channels != 3) fail(Errc::io_failure, "pnm supports 1 or 3 channels");
    std::string out = img.channels == 1 ? "P5\n" : "P6\n";
    out += std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
    return out;
}

inline Raster parse_pnm(std::string_view text) {
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < text.size()) {
            char ch = text[pos];
            if (ch == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
                ++pos;
            } else {
                break;
            }
        }
        std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        return std::string(text.substr(start, pos - start));
    };

    std::string magic = next_token();
    int channels = magic == "P5" ? 1 : magic == "P6" ? 3 : 0;
    if (channels == 0) fail(Errc::malformed_file, "unsupported pnm magic '" + magic + "'");
    int w = static_cast<int>(parse_long(next_token(), "pnm width"));
    int h = static_cast<int>(parse_long(next_token(), "pnm height"));
    long maxval = parse_long(next_token(), "pnm maxval");
    if (w <= 0 || h <= 0 || maxval != 255) fail(Errc::malformed_file, "unsupported pnm geometry");
    ++pos; // single whitespace byte after maxval

    Raster img(w, h, channels);
    if (text.size() - pos < img.data.size()) fail(Errc::malformed_file, "truncated pnm payload");
    std::copy_n(reinterpret_cast<const std::uint8_t*>(text.data()) + pos, img.data.size(),
                img.data.begin());
    return img;
}

inline Raster read_pnm(const std::filesystem::path& path) { return parse_pnm(read_file(path)); }
inline void write_pnm(const std::filesystem::path& path, const Raster& img) {
    write_file(path, format_pnm(img));
}

} // namespace partfuse
