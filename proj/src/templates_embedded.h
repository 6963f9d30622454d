// Copyright 2026 The Instructkit Authors.
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

#ifndef INSTRUCTKIT_SRC_TEMPLATES_EMBEDDED_H_
#define INSTRUCTKIT_SRC_TEMPLATES_EMBEDDED_H_

#include <string_view>

namespace instructkit::internal {

// Contents of templates/<name>.txt, or a null view if there is no such file.
std::string_view FindEmbeddedTemplate(std::string_view name);

}  // namespace instructkit::internal

#endif  // INSTRUCTKIT_SRC_TEMPLATES_EMBEDDED_H_
