#include "easeg/vol/volume.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "easeg/core/fs.hpp"
#include "easeg/core/ini.hpp"

namespace easeg::vol {

namespace fs = std::filesystem;

const char* to_string(PhaseTag tag) {
  switch (tag) {
    case PhaseTag::arterial: return "arterial";
    case PhaseTag::venous: return "venous";
    case PhaseTag::synthetic_arterial: return "synthetic_arterial";
    case PhaseTag::synthetic_venous: return "synthetic_venous";
    case PhaseTag::external: return "external";
    case PhaseTag::external_translated: return "external_translated";
  }
  return "?";
}

PhaseTag phase_from_string(const std::string& s) {
  for (auto tag : {PhaseTag::arterial, PhaseTag::venous,
                   PhaseTag::synthetic_arterial, PhaseTag::synthetic_venous,
                   PhaseTag::external, PhaseTag::external_translated})
    if (s == to_string(tag)) return tag;
  throw std::invalid_argument("unknown phase tag: " + s);
}

bool is_synthetic(PhaseTag tag) {
  return tag == PhaseTag::synthetic_arterial ||
         tag == PhaseTag::synthetic_venous;
}

bool is_real_internal(PhaseTag tag) {
  return tag == PhaseTag::arterial || tag == PhaseTag::venous;
}

const char* to_string(LabelSpace space) {
  switch (space) {
    case LabelSpace::internal: return "internal";
    case LabelSpace::external: return "external";
    case LabelSpace::union_space: return "union";
  }
  return "?";
}

LabelSpace label_space_from_string(const std::string& s) {
  if (s == "internal") return LabelSpace::internal;
  if (s == "external") return LabelSpace::external;
  if (s == "union") return LabelSpace::union_space;
  throw std::invalid_argument("unknown label space: " + s);
}

int n_classes(LabelSpace space) {
  return space == LabelSpace::union_space ? 3 : 2;
}

bool space_contains(LabelSpace space, int stored_value) {
  return stored_value >= 0 && stored_value < n_classes(space);
}

int to_union_class(LabelSpace space, int stored_value) {
  if (!space_contains(space, stored_value))
    throw std::invalid_argument("label value outside its space");
  if (stored_value == 0) return kBackground;
  switch (space) {
    case LabelSpace::internal: return kInjury;
    case LabelSpace::external: return kSpleen;
    case LabelSpace::union_space: return stored_value;
  }
  return kBackground;
}

void LabelMap::validate() const {
  int max_value = n_classes(space) - 1;
  for (const auto& slice : labels.slices())
    if ((slice > static_cast<std::uint8_t>(max_value)).any())
      throw std::invalid_argument(
          std::string("label map contains values outside space '") +
          to_string(space) + "'");
}

void require_aligned(const Shape3& a, const Shape3& b, const char* what) {
  if (!(a == b)) {
    std::ostringstream msg;
    msg << what << ": shape mismatch (" << a.nx << "x" << a.ny << "x" << a.nz
        << " vs " << b.nx << "x" << b.ny << "x" << b.nz << ")";
    throw std::invalid_argument(msg.str());
  }
}

namespace {

std::string meta_text(const Shape3& shape, const Spacing& spacing,
                      const std::string& phase, const std::string& patient_id,
                      const std::string& space) {
  std::ostringstream out;
  out << "shape = " << shape.nx << " " << shape.ny << " " << shape.nz << "\n";
  out << "spacing = " << spacing.x << " " << spacing.y << " " << spacing.z
      << "\n";
  out << "phase = " << phase << "\n";
  out << "patient_id = " << patient_id << "\n";
  if (!space.empty()) out << "space = " << space << "\n";
  return out.str();
}

struct Meta {
  Shape3 shape;
  Spacing spacing;
  std::string phase;
  std::string patient_id;
  std::string space;
};

Meta read_meta(const fs::path& path) {
  Meta m;
  for (const auto& line : read_lines(path)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string s) {
      while (!s.empty() && std::isspace((unsigned char)s.front())) s.erase(0, 1);
      while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
      return s;
    };
    key = strip(key);
    value = strip(value);
    std::istringstream vs(value);
    if (key == "shape")
      vs >> m.shape.nx >> m.shape.ny >> m.shape.nz;
    else if (key == "spacing")
      vs >> m.spacing.x >> m.spacing.y >> m.spacing.z;
    else if (key == "phase")
      m.phase = value;
    else if (key == "patient_id")
      m.patient_id = value;
    else if (key == "space")
      m.space = value;
  }
  if (m.shape.nx < 1 || m.shape.ny < 1 || m.shape.nz < 1)
    throw std::runtime_error("invalid or missing shape in " + path.string());
  if (m.spacing.x <= 0 || m.spacing.y <= 0 || m.spacing.z <= 0)
    throw std::runtime_error("invalid spacing in " + path.string());
  return m;
}

template <typename T>
std::vector<T> flatten(const Grid3<T>& grid) {
  const auto& s = grid.shape();
  std::vector<T> flat;
  flat.reserve(static_cast<std::size_t>(s.voxels()));
  for (int z = 0; z < s.nz; ++z) {
    const auto& sl = grid.slice(z);
    flat.insert(flat.end(), sl.data(), sl.data() + sl.size());
  }
  return flat;
}

template <typename T>
Grid3<T> unflatten(const std::vector<T>& flat, const Shape3& shape) {
  if (flat.size() != static_cast<std::size_t>(shape.voxels()))
    throw std::runtime_error("raw volume size does not match sidecar shape");
  Grid3<T> grid(shape);
  const T* p = flat.data();
  for (int z = 0; z < shape.nz; ++z) {
    auto& sl = grid.slice(z);
    std::memcpy(sl.data(), p, sizeof(T) * sl.size());
    p += sl.size();
  }
  return grid;
}

}  // namespace

void write_volume(const fs::path& case_dir, const Volume& v) {
  fs::create_directories(case_dir);
  const std::string stem = to_string(v.phase);
  auto flat = flatten(v.data);
  write_bytes(case_dir / (stem + ".vol"), flat.data(),
              flat.size() * sizeof(float));
  write_text(case_dir / (stem + ".meta"),
             meta_text(v.shape(), v.spacing, stem, v.patient_id, ""));
}

Volume read_volume(const fs::path& case_dir, PhaseTag phase) {
  const std::string stem = to_string(phase);
  Meta m = read_meta(case_dir / (stem + ".meta"));
  auto bytes = read_bytes(case_dir / (stem + ".vol"));
  if (bytes.size() != static_cast<std::size_t>(m.shape.voxels()) * 4)
    throw std::runtime_error("volume file size mismatch in " +
                             case_dir.string());
  std::vector<float> flat(static_cast<std::size_t>(m.shape.voxels()));
  std::memcpy(flat.data(), bytes.data(), bytes.size());
  Volume v;
  v.data = unflatten(flat, m.shape);
  v.spacing = m.spacing;
  v.phase = m.phase.empty() ? phase : phase_from_string(m.phase);
  v.patient_id = m.patient_id;
  return v;
}

void write_labels(const fs::path& case_dir, PhaseTag phase, const LabelMap& l,
                  const std::string& patient_id) {
  fs::create_directories(case_dir);
  l.validate();
  const std::string stem = to_string(phase);
  auto flat = flatten(l.labels);
  write_bytes(case_dir / (stem + ".lbl"), flat.data(), flat.size());
  write_text(case_dir / (stem + ".lbl.meta"),
             meta_text(l.shape(), Spacing{}, stem, patient_id,
                       to_string(l.space)));
}

LabelMap read_labels(const fs::path& case_dir, PhaseTag phase) {
  const std::string stem = to_string(phase);
  Meta m = read_meta(case_dir / (stem + ".lbl.meta"));
  auto bytes = read_bytes(case_dir / (stem + ".lbl"));
  std::vector<std::uint8_t> flat(bytes.begin(), bytes.end());
  LabelMap l;
  l.labels = unflatten(flat, m.shape);
  l.space = m.space.empty() ? LabelSpace::internal
                            : label_space_from_string(m.space);
  l.validate();
  return l;
}

bool has_volume(const fs::path& case_dir, PhaseTag phase) {
  return fs::exists(case_dir / (std::string(to_string(phase)) + ".vol"));
}

bool has_labels(const fs::path& case_dir, PhaseTag phase) {
  return fs::exists(case_dir / (std::string(to_string(phase)) + ".lbl"));
}

void write_mask(const fs::path& path_base, const GridB& mask) {
  auto flat = flatten(mask);
  write_bytes(fs::path(path_base.string() + ".msk"), flat.data(), flat.size());
  write_text(fs::path(path_base.string() + ".msk.meta"),
             meta_text(mask.shape(), Spacing{}, "", "", "union"));
}

GridB read_mask(const fs::path& path_base) {
  Meta m = read_meta(fs::path(path_base.string() + ".msk.meta"));
  auto bytes = read_bytes(fs::path(path_base.string() + ".msk"));
  std::vector<std::uint8_t> flat(bytes.begin(), bytes.end());
  return unflatten(flat, m.shape);
}

}  // namespace easeg::vol
