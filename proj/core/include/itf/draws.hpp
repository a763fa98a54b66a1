// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "itf/dpm_sampler.hpp"
#include "itf/itf_sampler.hpp"
#include "itf/kernels.hpp"
#include "itf/stick.hpp"

namespace itf {

enum class ModelKind { itf, dpm };

const char* to_string(ModelKind m);
ModelKind parse_model_kind(const std::string& s);

/// One retained sweep. DPM draws leave psi and c empty; their shared
/// labels live in c0.
struct Draw {
  std::size_t sweep = 0;
  std::size_t chain = 0;
  double alpha = 1.0;
  std::vector<double> beta;
  StickMeasure lambda;
  std::vector<std::vector<StickMeasure>> psi;
  std::vector<std::vector<Atom>> theta;
  std::vector<std::size_t> c0;
  std::vector<std::vector<std::size_t>> c;
};

Draw snapshot(const ItfSampler& s, std::size_t sweep, std::size_t chain);
Draw snapshot(const DpmSampler& s, std::size_t sweep, std::size_t chain);

struct StreamHeader {
  ModelKind model = ModelKind::itf;
  std::uint64_t seed = 0;
  /// Run configuration as a JSON object text.
  std::string config = "{}";
  std::vector<Kernel> kernels;
  /// Component names, aligned with kernels.
  std::vector<std::string> components;
};

struct PosteriorDraws {
  StreamHeader header;
  std::vector<Draw> draws;
};

/// Newline-delimited JSON: one header line, then one line per draw.
std::string header_line(const StreamHeader& h);
std::string draw_line(const Draw& d);
StreamHeader parse_header_line(const std::string& line);
Draw parse_draw_line(const std::string& line);

void write_draws(std::ostream& out, const PosteriorDraws& d);
PosteriorDraws read_draws(std::istream& in);
PosteriorDraws read_draws(const std::filesystem::path& path);

/// JSON text of a kernel prior, and back.
std::string kernel_to_json(const Kernel& k);
Kernel kernel_from_json(const std::string& text);

/// Full resumable sampler state.
struct Checkpoint {
  ModelKind model = ModelKind::itf;
  std::size_t sweep = 0;
  std::size_t chain = 0;
  std::string rng;
  ItfState itf;
  DpmState dpm;
  /// Draws retained before the checkpoint.
  std::vector<Draw> draws;
};

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace itf
