#pragma once

#include <cstdint>
#include <string>

#include "arraysep/types.h"

namespace arraysep {

enum class WavFormat { kPcm16, kFloat32 };

struct WavData {
  double sample_rate = 16000.0;
  MultiSignal channels;  // samples in [-1, 1]
};

// Little-endian RIFF/WAVE, PCM 16-bit or IEEE float 32-bit (WAVE_FORMAT_EXTENSIBLE
// accepted on read). Throws IoError on I/O failure or an unsupported layout.
WavData read_wav(const std::string& path);
void write_wav(const std::string& path, const WavData& data, WavFormat format = WavFormat::kPcm16);

}  // namespace arraysep
