#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace poo {

/// mt19937_64 is fully specified by the standard, so sequences are portable.
/// The distributions below are written out instead of using <random>'s
/// distribution objects, whose output is implementation-defined and whose
/// hidden state would not survive a checkpoint.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derive a child seed from a parent seed and a stream label.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label);

/// FNV-1a, used to turn text tags into seed labels.
std::uint64_t hash_tag(std::string_view tag);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Engine& engine);

/// Uniform double in [lo, hi).
double uniform_real(Engine& engine, double lo, double hi);

/// Unbiased uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Engine& engine, std::size_t n);

/// Standard normal draw (Box-Muller, nothing cached between calls).
double standard_normal(Engine& engine);

std::string save_engine(const Engine& engine);
Engine load_engine(const std::string& text);

}  // namespace poo
