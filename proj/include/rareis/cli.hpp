// Copyright 2026 The rareis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RAREIS_CLI_HPP
#define RAREIS_CLI_HPP

namespace rareis {

/// Command-line front end (run | study | spectrum). Exit codes:
/// 0 converged, 1 non-converged estimate produced, 2 usage/config error.
int cli_main(int argc, const char* const* argv);

}  // namespace rareis

#endif  // RAREIS_CLI_HPP
