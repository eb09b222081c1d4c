#pragma once

#include "guicap/image.hpp"

#include <filesystem>
#include <string>

namespace guicap {

void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

/// In-memory PNG codecs for wire transfer.
std::string encode_png(const Image& img);
Image decode_png(const std::string& bytes);

} // namespace guicap
