// Copyright 2026 The dptempcoh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "media/jpeg_codec.hpp"

#include <csetjmp>
#include <cstdio>

#include <jpeglib.h>

DPTC_BEGIN_NAMESPACE

namespace {

struct ErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<ErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

}  // namespace

Image8 jpeg_round_trip(const Image8& image, int quality) {
  check_arg(image.channels == 3, "jpeg_round_trip expects RGB input");
  check_arg(quality >= 1 && quality <= 100, "JPEG quality must be in [1,100]");

  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  {
    jpeg_compress_struct cinfo{};
    ErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = on_error;
    if (setjmp(err.jump)) {
      jpeg_destroy_compress(&cinfo);
      std::free(buffer);
      fail(ErrorCode::kInternal, std::string("JPEG encode failed: ") + err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buffer, &size);
    cinfo.image_width = static_cast<JDIMENSION>(image.width);
    cinfo.image_height = static_cast<JDIMENSION>(image.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    // 4:4:4 sampling: quality alone controls the loss.
    for (int i = 0; i < cinfo.num_components; ++i) cinfo.comp_info[i].h_samp_factor = cinfo.comp_info[i].v_samp_factor = 1;
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
      JSAMPROW row = const_cast<JSAMPROW>(image.pixels.data() +
                                          static_cast<size_t>(cinfo.next_scanline) * image.width * 3);
      jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
  }

  Image8 out{image.width, image.height, 3, std::vector<std::uint8_t>(image.pixels.size())};
  jpeg_decompress_struct dinfo{};
  ErrorManager err{};
  dinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_error;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&dinfo);
    std::free(buffer);
    fail(ErrorCode::kInternal, std::string("JPEG decode failed: ") + err.message);
  }
  jpeg_create_decompress(&dinfo);
  jpeg_mem_src(&dinfo, buffer, size);
  jpeg_read_header(&dinfo, TRUE);
  dinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&dinfo);
  while (dinfo.output_scanline < dinfo.output_height) {
    JSAMPROW row = out.pixels.data() + static_cast<size_t>(dinfo.output_scanline) * image.width * 3;
    jpeg_read_scanlines(&dinfo, &row, 1);
  }
  jpeg_finish_decompress(&dinfo);
  jpeg_destroy_decompress(&dinfo);
  std::free(buffer);
  return out;
}

std::string jpeg_codec_identity() {
#ifdef LIBJPEG_TURBO_VERSION
#define DPTC_STR2(x) #x
#define DPTC_STR(x) DPTC_STR2(x)
  return std::string("libjpeg-turbo ") + DPTC_STR(LIBJPEG_TURBO_VERSION) + " (API " +
         std::to_string(JPEG_LIB_VERSION) + ", 4:4:4)";
#else
  return "libjpeg API " + std::to_string(JPEG_LIB_VERSION) + " (4:4:4)";
#endif
}

DPTC_END_NAMESPACE
