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

#include "exifaudit/http.hpp"

#include <httplib.h>

#include <regex>

#include "exifaudit/error.hpp"

namespace exifaudit {

HttpResponse http_post_json(const HttpRequest& request) {
  static const std::regex kUrl(R"(^(https?)://([^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(request.url, m, kUrl)) throw Error(Errc::ConfigError, "bad endpoint URL: " + request.url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (m[1] == "https") throw Error(Errc::ConfigError, "built without TLS support: " + request.url);
#endif
  httplib::Client client(m[1].str() + "://" + m[2].str());
  client.set_connection_timeout(request.timeout);
  client.set_read_timeout(request.timeout);
  client.set_write_timeout(request.timeout);

  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  const std::string path = m[3].matched ? m[3].str() : "/";
  auto result = client.Post(path, headers, request.body, "application/json");
  if (!result) {
    throw Error(Errc::BackendTimeout, request.url + ": " + httplib::to_string(result.error()));
  }
  return {result->status, result->body};
}

}  // namespace exifaudit
