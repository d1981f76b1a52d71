#include "pastegen/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

#include "pastegen/errors.hpp"

namespace pastegen {

namespace {

bool has_jpeg_magic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char magic[2] = {0, 0};
    in.read(reinterpret_cast<char*>(magic), 2);
    return in.good() && magic[0] == 0xFF && magic[1] == 0xD8;
}

Raster load_png_file(const std::string& path, int channels) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw UnreadableImage("cannot read PNG: " + path);
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw UnreadableImage("cannot decode PNG: " + path);
    }
    return Raster(static_cast<int>(image.width), static_cast<int>(image.height),
                  channels, std::move(buffer));
}

struct JpegErrorTrap {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* trap = reinterpret_cast<JpegErrorTrap*>(cinfo->err);
    std::longjmp(trap->jump, 1);
}

Raster load_jpeg_file(const std::string& path, int channels) {
    std::FILE* file = std::fopen(path.c_str(), "rb");
    if (!file)
        throw UnreadableImage("cannot open: " + path);

    jpeg_decompress_struct cinfo{};
    JpegErrorTrap trap;
    cinfo.err = jpeg_std_error(&trap.mgr);
    trap.mgr.error_exit = jpeg_error_exit;

    std::vector<std::uint8_t> buffer;
    if (setjmp(trap.jump)) {
        jpeg_destroy_decompress(&cinfo);
        std::fclose(file);
        throw UnreadableImage("cannot decode JPEG: " + path);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_start_decompress(&cinfo);

    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    buffer.resize(static_cast<std::size_t>(w) * h * channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        std::uint8_t* row = buffer.data() +
                            static_cast<std::size_t>(cinfo.output_scanline) * w * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    std::fclose(file);
    return Raster(w, h, channels, std::move(buffer));
}

} // namespace

Raster load_image(const std::string& path, int channels) {
    if (channels != 1 && channels != 3)
        throw Error("load_image: channels must be 1 or 3");
    if (has_jpeg_magic(path))
        return load_jpeg_file(path, channels);
    return load_png_file(path, channels);
}

void save_png(const std::string& path, const Raster& img) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.data().data(), 0, nullptr))
        throw IoError("cannot write PNG: " + path);
}

} // namespace pastegen
