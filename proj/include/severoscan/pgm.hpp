#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "severoscan/error.hpp"
#include "severoscan/image.hpp"

namespace severoscan {

namespace detail {

// Reads one whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(const std::vector<char>& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        const auto c = static_cast<unsigned char>(buf[pos]);
        if (c == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else if (std::isspace(c)) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos])) && buf[pos] != '#')
        tok.push_back(buf[pos++]);
    return tok;
}

inline int pnm_positive(const std::string& tok, const char* what) {
    if (tok.empty() || tok.size() > 9)
        throw FormatError(std::string("malformed PGM header: ") + what);
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw FormatError(std::string("malformed PGM header: ") + what);
    return std::stoi(tok);
}

} // namespace detail

// Decodes binary PGM (P5, maxval 255). Anything else is rejected.
inline GrayImage decode_pgm(const std::vector<char>& buf) {
    if (buf.size() >= 8 && static_cast<unsigned char>(buf[0]) == 0x89 && buf[1] == 'P' &&
        buf[2] == 'N' && buf[3] == 'G')
        throw FormatError("unsupported format: PNG");
    if (buf.size() < 2 || buf[0] != 'P')
        throw FormatError("unsupported format");
    switch (buf[1]) {
    case '5':
        break;
    case '3':
    case '6':
        throw FormatError("color input not supported");
    default:
        throw FormatError("unsupported format");
    }

    std::size_t pos = 2;
    const int width = detail::pnm_positive(detail::pnm_token(buf, pos), "width");
    const int height = detail::pnm_positive(detail::pnm_token(buf, pos), "height");
    const int maxval = detail::pnm_positive(detail::pnm_token(buf, pos), "maxval");
    if (width == 0 || height == 0) throw FormatError("zero-dimension image");
    if (maxval > 255) throw FormatError("unsupported bit depth");
    if (maxval != 255) throw FormatError("unsupported maxval (must be 255)");
    // Exactly one whitespace byte separates the header from the raster.
    if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos])))
        throw FormatError("malformed PGM header");
    ++pos;

    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (buf.size() - pos < n) throw FormatError("truncated PGM payload");
    std::vector<std::uint8_t> px(n);
    for (std::size_t i = 0; i < n; ++i) px[i] = static_cast<std::uint8_t>(buf[pos + i]);
    return GrayImage(width, height, std::move(px));
}

inline std::vector<char> encode_pgm(const GrayImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<char> out(header.begin(), header.end());
    out.reserve(header.size() + img.size());
    for (auto v : img.pixels()) out.push_back(static_cast<char>(v));
    return out;
}

inline GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open image: " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pgm(buf);
    } catch (const FormatError& e) {
        throw FormatError(std::string(e.what()) + ": " + path.string());
    }
}

inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write image: " + path.string());
    const auto bytes = encode_pgm(img);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write image: " + path.string());
}

inline void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    save_image(mask_to_gray(mask), path);
}

inline BinaryMask load_mask(const std::filesystem::path& path) {
    return gray_to_mask(load_image(path));
}

} // namespace severoscan
