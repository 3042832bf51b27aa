#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mechent/model.hpp"
#include "mechent/operator_algebra.hpp"
#include "mechent/params.hpp"

namespace mechent {

inline constexpr std::uint32_t checkpoint_version = 1;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s);

/// Hash of every physical parameter (bit patterns) and the frame.
std::uint64_t params_hash(const SystemParams& p, Frame frame);

/// Density matrix (Schrodinger picture of the run's frame) at time t.
struct Checkpoint {
  std::vector<int> dims;
  double t = 0.0;
  std::uint64_t params_hash = 0;
  Operator rho;
};

/// Layout: "MECHCKPT", u32 version, u32 slot count, i32 dims..., f64 t, u64 params
/// hash, then rho row-major as (re, im) f64 pairs, then u64 FNV-1a of everything
/// before it. All little-endian. Throws IoError.
void write_checkpoint(const std::string& path, const Checkpoint& ck);

/// Throws IoError if unreadable, CheckpointError if malformed or corrupt.
Checkpoint read_checkpoint(const std::string& path);

}  // namespace mechent
