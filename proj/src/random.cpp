#include "poo/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "poo/error.hpp"

namespace poo {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::address: return "address error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::empty: return "empty-instance error";
    case ErrorKind::not_ready: return "not-ready error";
    case ErrorKind::fit: return "fit error";
    case ErrorKind::resource: return "resource error";
    case ErrorKind::capability: return "capability error";
    case ErrorKind::config: return "config error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::format: return "format error";
  }
  return "error";
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) {
  return mix64(mix64(parent) ^ (label + 0x632be59bd9b4e019ULL));
}

std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

double uniform_real(Engine& engine, double lo, double hi) {
  return lo + (hi - lo) * uniform01(engine);
}

std::size_t uniform_index(Engine& engine, std::size_t n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  // Reject the incomplete top block so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range + 1) % range;
  std::uint64_t draw = engine();
  while (draw > limit) draw = engine();
  return static_cast<std::size_t>(draw % range);
}

double standard_normal(Engine& engine) {
  double u1 = uniform01(engine);
  while (u1 <= 0.0) u1 = uniform01(engine);
  const double u2 = uniform01(engine);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string save_engine(const Engine& engine) {
  std::ostringstream out;
  out << engine;
  return out.str();
}

Engine load_engine(const std::string& text) {
  Engine engine;
  std::istringstream in(text);
  in >> engine;
  if (in.fail()) throw Error(ErrorKind::format, "malformed random engine state");
  return engine;
}

}  // namespace poo
