#pragma once

#include <string>

#include "varsample/sampler.hpp"

namespace varsample::io {

// Sample CSV: '#'-prefixed header (vars, epsilon, delta, certificate, seed,
// run statistics) followed by one point per line at full double precision.
void write_sample_csv(const sampler::SampleCloud& cloud, const std::string& path);
sampler::SampleCloud read_sample_csv(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace varsample::io
