#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pastegen/errors.hpp"

namespace pastegen {

/// 8-bit raster, row-major, top-left origin, x rightward, y downward.
/// Either 1 channel (mask) or 3 channels (color, RGB order).
class Raster {
public:
    Raster() = default;

    Raster(int width, int height, int channels, std::uint8_t fill = 0)
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, fill) {
        if (width < 1 || height < 1)
            throw Error("Raster: dimensions must be at least 1x1");
        if (channels != 1 && channels != 3)
            throw Error("Raster: channels must be 1 or 3");
    }

    Raster(int width, int height, int channels, std::vector<std::uint8_t> data)
        : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
        if (width < 1 || height < 1)
            throw Error("Raster: dimensions must be at least 1x1");
        if (channels != 1 && channels != 3)
            throw Error("Raster: channels must be 1 or 3");
        if (data_.size() != static_cast<std::size_t>(width) * height * channels)
            throw Error("Raster: data length does not match width*height*channels");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }

    bool contains(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::uint8_t at(int x, int y, int c = 0) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    std::span<const std::uint8_t> data() const { return data_; }
    std::span<std::uint8_t> data() { return data_; }

    bool same_dims(const Raster& other) const {
        return width_ == other.width_ && height_ == other.height_ &&
               channels_ == other.channels_;
    }

    friend bool operator==(const Raster& a, const Raster& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ &&
               a.channels_ == b.channels_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<std::uint8_t> data_;
};

} // namespace pastegen
