/* Copyright 2026 The audiostyle Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace audiostyle {

enum class Errc {
  file_not_found,
  unsupported_format,
  empty_data,
  malformed_file,
  write_failed,
  invalid_argument,
  dimension_mismatch,
  sample_rate_mismatch,
  silent_input,
  bad_magic,
  version_mismatch,
  truncated,
};

const char* to_string(Errc code);

/// Every failure in the library is reported as an Error carrying a code, so
/// callers can branch on the kind without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace audiostyle
