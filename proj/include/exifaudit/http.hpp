/*
 * Copyright (C) 2026 The exifaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace exifaudit {

struct HttpRequest {
  std::string url;  // http://host[:port]/path or https://...
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::milliseconds timeout{30000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// One POST with a JSON body; no retries. Transport failures (refused,
// timed out, reset) throw Error{BackendTimeout}; malformed URLs and https
// without TLS support throw Error{ConfigError}.
HttpResponse http_post_json(const HttpRequest& request);

}  // namespace exifaudit
