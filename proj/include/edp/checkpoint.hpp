#pragma once

#include <string>

#include "edp/optim.hpp"

namespace edp {

// Flat binary checkpoint: magic "EDPCKPT1", u32 version, u32 entry count,
// then per entry: u32 name length, name bytes, u32 rank, u64 dims...,
// little-endian f64 values. Adam state travels as extra entries with
// ".adam.m" / ".adam.v" suffixed names plus a scalar "adam.t".
void save_checkpoint(const std::string& path, const ParamSet& params, const Adam* adam = nullptr);

// Loads values into an already-built ParamSet (shapes must match).
// When adam != nullptr, restores moments and step count if present.
void load_checkpoint(const std::string& path, ParamSet& params, Adam* adam = nullptr);

}  // namespace edp
