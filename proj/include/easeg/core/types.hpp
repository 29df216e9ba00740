#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace easeg {

// 2D axial slice, row-major so memory order is x-fastest within a row.
// Indexing is (y, x).
template <typename T>
using Image = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageF = Image<float>;
using ImageD = Image<double>;
using ImageB = Image<std::uint8_t>;

struct Shape3 {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  bool operator==(const Shape3&) const = default;
  std::int64_t voxels() const {
    return static_cast<std::int64_t>(nx) * ny * nz;
  }
};

struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  bool operator==(const Spacing&) const = default;
};

// Dense 3D grid stored as a stack of axial slices (z-major).
template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(Shape3 shape, T fill = T{}) : shape_(shape) {
    slices_.assign(static_cast<std::size_t>(shape.nz),
                   Image<T>::Constant(shape.ny, shape.nx, fill));
  }

  const Shape3& shape() const { return shape_; }
  bool empty() const { return slices_.empty(); }

  Image<T>& slice(int z) { return slices_[static_cast<std::size_t>(z)]; }
  const Image<T>& slice(int z) const {
    return slices_[static_cast<std::size_t>(z)];
  }

  T& at(int x, int y, int z) { return slices_[std::size_t(z)](y, x); }
  T at(int x, int y, int z) const { return slices_[std::size_t(z)](y, x); }

  std::vector<Image<T>>& slices() { return slices_; }
  const std::vector<Image<T>>& slices() const { return slices_; }

  template <typename F>
  void for_each(F&& f) const {
    for (int z = 0; z < shape_.nz; ++z)
      for (int y = 0; y < shape_.ny; ++y)
        for (int x = 0; x < shape_.nx; ++x) f(x, y, z, slices_[z](y, x));
  }

 private:
  Shape3 shape_;
  std::vector<Image<T>> slices_;
};

using GridF = Grid3<float>;
using GridB = Grid3<std::uint8_t>;

}  // namespace easeg
