#include <cstring>
#include <fstream>

#include "easeg/core/fs.hpp"
#include "easeg/vol/volume.hpp"

namespace easeg::vol {

namespace {

// NIfTI-1 header fields we need (single-file .nii, little-endian).
struct NiftiHeader {
  std::int32_t sizeof_hdr;
  std::int16_t dim[8];
  std::int16_t datatype;
  std::int16_t bitpix;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  char magic[4];
};

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtInt32 = 8;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtFloat64 = 64;

template <typename Raw>
void fill_grid(GridF& grid, const char* bytes, std::size_t count, float slope,
               float inter) {
  std::vector<Raw> raw(count);
  std::memcpy(raw.data(), bytes, count * sizeof(Raw));
  const Shape3& s = grid.shape();
  std::size_t i = 0;
  for (int z = 0; z < s.nz; ++z) {
    auto& sl = grid.slice(z);
    for (int y = 0; y < s.ny; ++y)
      for (int x = 0; x < s.nx; ++x)
        sl(y, x) = static_cast<float>(raw[i++]) * slope + inter;
  }
}

}  // namespace

Volume read_nifti(const std::filesystem::path& path) {
  auto bytes = read_bytes(path);
  if (bytes.size() < 352)
    throw std::runtime_error("not a NIfTI-1 file (too small): " +
                             path.string());

  NiftiHeader h{};
  std::memcpy(&h.sizeof_hdr, bytes.data() + 0, 4);
  std::memcpy(h.dim, bytes.data() + 40, 16);
  std::memcpy(&h.datatype, bytes.data() + 70, 2);
  std::memcpy(&h.bitpix, bytes.data() + 72, 2);
  std::memcpy(h.pixdim, bytes.data() + 76, 32);
  std::memcpy(&h.vox_offset, bytes.data() + 108, 4);
  std::memcpy(&h.scl_slope, bytes.data() + 112, 4);
  std::memcpy(&h.scl_inter, bytes.data() + 116, 4);
  std::memcpy(h.magic, bytes.data() + 344, 4);

  if (h.sizeof_hdr != 348 || std::strncmp(h.magic, "n+1", 3) != 0)
    throw std::runtime_error(
        "unsupported NIfTI file (expect single-file little-endian n+1): " +
        path.string());
  if (h.dim[0] < 3)
    throw std::runtime_error("NIfTI volume must be 3D: " + path.string());

  Shape3 shape{h.dim[1], h.dim[2], h.dim[3]};
  if (shape.nx < 1 || shape.ny < 1 || shape.nz < 1)
    throw std::runtime_error("invalid NIfTI dims: " + path.string());

  float slope = (h.scl_slope == 0.0f) ? 1.0f : h.scl_slope;
  float inter = h.scl_inter;
  auto count = static_cast<std::size_t>(shape.voxels());
  auto offset = static_cast<std::size_t>(h.vox_offset);
  std::size_t elem =
      h.datatype == kDtUint8 ? 1 : h.datatype == kDtInt16 ? 2
      : h.datatype == kDtInt32 || h.datatype == kDtFloat32 ? 4
      : h.datatype == kDtFloat64                           ? 8
                                                           : 0;
  if (elem == 0)
    throw std::runtime_error("unsupported NIfTI datatype " +
                             std::to_string(h.datatype) + ": " + path.string());
  if (bytes.size() < offset + count * elem)
    throw std::runtime_error("NIfTI file truncated: " + path.string());

  Volume v;
  v.data = GridF(shape);
  const char* data = bytes.data() + offset;
  switch (h.datatype) {
    case kDtUint8: fill_grid<std::uint8_t>(v.data, data, count, slope, inter); break;
    case kDtInt16: fill_grid<std::int16_t>(v.data, data, count, slope, inter); break;
    case kDtInt32: fill_grid<std::int32_t>(v.data, data, count, slope, inter); break;
    case kDtFloat32: fill_grid<float>(v.data, data, count, slope, inter); break;
    case kDtFloat64: fill_grid<double>(v.data, data, count, slope, inter); break;
  }
  v.spacing = Spacing{h.pixdim[1] > 0 ? h.pixdim[1] : 1.0,
                      h.pixdim[2] > 0 ? h.pixdim[2] : 1.0,
                      h.pixdim[3] > 0 ? h.pixdim[3] : 1.0};
  v.patient_id = path.stem().string();
  return v;
}

}  // namespace easeg::vol
