/*
 * Copyright 2026 The sfsel Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfs {

enum class Errc {
  MissingColumn,
  BadOrderKey,
  EmptyField,
  NonTemporalOrderKey,
  EmptyKinds,
  SingleClassLabels,
  LengthMismatch,
  EmptySelection,
  DegenerateSplit,
  MissingFeature,
  NoConvergence,
  InvalidArgument,
  Format,
  Io,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::BadOrderKey: return "BadOrderKey";
    case Errc::EmptyField: return "EmptyField";
    case Errc::NonTemporalOrderKey: return "NonTemporalOrderKey";
    case Errc::EmptyKinds: return "EmptyKinds";
    case Errc::SingleClassLabels: return "SingleClassLabels";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::MissingFeature: return "MissingFeature";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Format: return "Format";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

// Conditions caused by the data itself rather than by how the tool was
// invoked. The CLI maps these to exit code 3.
inline bool is_data_condition(Errc code) {
  return code == Errc::SingleClassLabels || code == Errc::NonTemporalOrderKey ||
         code == Errc::DegenerateSplit || code == Errc::NoConvergence;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sfs
