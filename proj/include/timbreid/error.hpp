// Copyright 2026 The timbreid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace timbreid {

/// Base class for all toolkit errors. `code()` is a stable machine-readable
/// name used by the CLI and by tests; `what()` carries the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define TIMBREID_DEFINE_ERROR(NAME)                       \
  class NAME : public Error {                             \
   public:                                                \
    explicit NAME(const std::string& message)             \
        : Error(#NAME, message) {}                        \
  }

// audio_io
TIMBREID_DEFINE_ERROR(IoError);
TIMBREID_DEFINE_ERROR(UnsupportedFormat);
TIMBREID_DEFINE_ERROR(EmptyAudio);
TIMBREID_DEFINE_ERROR(SilentStream);

// framing
TIMBREID_DEFINE_ERROR(StreamTooShort);

// dsp
TIMBREID_DEFINE_ERROR(FrameTooShort);

// forest
TIMBREID_DEFINE_ERROR(SingleClass);
TIMBREID_DEFINE_ERROR(EmptyTrainingSet);
TIMBREID_DEFINE_ERROR(DimensionMismatch);
TIMBREID_DEFINE_ERROR(CorruptModel);
TIMBREID_DEFINE_ERROR(VersionMismatch);

// timbre
TIMBREID_DEFINE_ERROR(MissingColumn);
TIMBREID_DEFINE_ERROR(LabelOutOfRange);
TIMBREID_DEFINE_ERROR(EmptyDataset);
TIMBREID_DEFINE_ERROR(MissingAudioFile);
TIMBREID_DEFINE_ERROR(ConventionMismatch);

// recognition
TIMBREID_DEFINE_ERROR(InsufficientSpeakers);
TIMBREID_DEFINE_ERROR(NoAcceptedFrames);
TIMBREID_DEFINE_ERROR(EmptyMatrix);

// eval
TIMBREID_DEFINE_ERROR(EmptyCounts);
TIMBREID_DEFINE_ERROR(SingleClassLabels);
TIMBREID_DEFINE_ERROR(CorpusTooSmall);

// config / cli
TIMBREID_DEFINE_ERROR(ConfigError);

#undef TIMBREID_DEFINE_ERROR

}  // namespace timbreid
