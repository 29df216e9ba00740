#pragma once

#include <cstdint>
#include <stdexcept>

#include "easeg/core/types.hpp"
#include "easeg/vol/volume.hpp"

namespace easeg::eval {

// Dice-Sorensen coefficient 2|P T| / (|P| + |T|); 1.0 when both masks are
// empty, 0.0 when exactly one is.
double dsc(const GridB& pred, const GridB& truth);

// Flat-buffer variant used by exhaustive small-instance sweeps.
double dsc_flat(const std::uint8_t* pred, const std::uint8_t* truth,
                std::size_t n);

// Fraction of ground-truth injury voxels covered by the attention support.
// Undefined (rejected) on an empty truth mask.
double attention_recall(const GridB& attention, const GridB& injury_truth);

}  // namespace easeg::eval
