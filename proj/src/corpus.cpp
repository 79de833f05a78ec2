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

#include "exifaudit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "exifaudit/apk.hpp"
#include "exifaudit/axml.hpp"
#include "exifaudit/dex_builder.hpp"
#include "exifaudit/exif.hpp"
#include "exifaudit/parallel.hpp"
#include "exifaudit/text.hpp"
#include "exifaudit/zip.hpp"

namespace exifaudit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Uniform draws built directly on the engine's output so the sequence does
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    eng_.seed(seq);
  }

  std::uint64_t below(std::uint64_t n) {
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do v = eng_(); while (v >= limit);
    return v % n;
  }
  int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  bool coin() { return eng_() >> 63; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 eng_;
};

std::size_t quota(double rate, std::size_t n) { return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n))); }

void check_rate(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::ConfigError, what + " must be within [0, 1]");
}

}  // namespace

std::map<MetadataType, double> SyntheticCorpusSpec::default_retention() {
  // Per-type counts over a population of 1095 leaky apps.
  return {{MetadataType::Gps, 680.0 / 1095},
          {MetadataType::DateTime, 1043.0 / 1095},
          {MetadataType::SmartphoneModel, 1055.0 / 1095},
          {MetadataType::SmartphoneBrand, 1055.0 / 1095},
          {MetadataType::DeviceSerialNumber, 998.0 / 1095}};
}

SyntheticCorpusSpec SyntheticCorpusSpec::parse(std::string_view text) {
  SyntheticCorpusSpec s;
  for (const KeyValue& kv : parse_key_values(text)) {
    if (kv.key == "app_count") s.app_count = kv_count(kv);
    else if (kv.key == "leak_rate") s.leak_rate = kv_real(kv);
    else if (kv.key == "seed") s.seed = kv_count(kv);
    else if (kv.key == "gate_fail_rate") s.gate_fail_rate = kv_real(kv);
    else if (kv.key.starts_with("retention.")) {
      auto type = parse_metadata_type(std::string_view(kv.key).substr(10));
      if (!type) throw Error(Errc::ConfigError, "line " + std::to_string(kv.line) + ": unknown type in " + kv.key);
      s.per_type_retention[*type] = kv_real(kv);
    } else {
      throw Error(Errc::ConfigError, "line " + std::to_string(kv.line) + ": unknown key " + kv.key);
    }
  }
  return s;
}

SyntheticCorpusSpec SyntheticCorpusSpec::load(const std::string& path) {
  Bytes b;
  try {
    b = read_file(path);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, "cannot read corpus spec " + path + ": " + e.what());
  }
  return parse(to_string(b));
}

std::string SyntheticCorpusSpec::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << "app_count = " << app_count << "\n"
     << "leak_rate = " << leak_rate << "\n"
     << "seed = " << seed << "\n"
     << "gate_fail_rate = " << gate_fail_rate << "\n";
  for (MetadataType t : kAllMetadataTypes) {
    auto it = per_type_retention.find(t);
    os << "retention." << to_string(t) << " = " << (it == per_type_retention.end() ? 0.0 : it->second) << "\n";
  }
  return os.str();
}

CorpusPlan plan_corpus(const SyntheticCorpusSpec& spec) {
  check_rate(spec.leak_rate, "leak_rate");
  check_rate(spec.gate_fail_rate, "gate_fail_rate");
  for (const auto& [t, r] : spec.per_type_retention) check_rate(r, "retention." + std::string(to_string(t)));

  const std::size_t n = spec.app_count;
  CorpusPlan plan;
  plan.decoy.assign(n, false);
  plan.leaky.assign(n, false);
  plan.retained.assign(n, {});

  Rng rng(spec.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::size_t decoys = std::min(n, quota(spec.gate_fail_rate, n));
  for (std::size_t i = 0; i < decoys; ++i) plan.decoy[order[i]] = true;
  std::vector<std::size_t> passing(order.begin() + static_cast<std::ptrdiff_t>(decoys), order.end());

  std::size_t leaky = std::min(passing.size(), quota(spec.leak_rate, passing.size()));
  std::vector<std::size_t> leakers(passing.begin(), passing.begin() + static_cast<std::ptrdiff_t>(leaky));
  for (std::size_t a : leakers) plan.leaky[a] = true;

  // Each type goes to the leaky apps holding the fewest types so far; a
  // fresh random key per round breaks ties.
  for (MetadataType t : kAllMetadataTypes) {
    auto it = spec.per_type_retention.find(t);
    std::size_t q = std::min(leaky, quota(it == spec.per_type_retention.end() ? 0.0 : it->second, leaky));
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    for (std::size_t a : leakers) keyed.push_back({rng.below(~std::uint64_t{0}), a});
    std::stable_sort(keyed.begin(), keyed.end(), [&](const auto& x, const auto& y) {
      std::size_t cx = plan.retained[x.second].size(), cy = plan.retained[y.second].size();
      return cx != cy ? cx < cy : x.first < y.first;
    });
    for (std::size_t i = 0; i < q; ++i) plan.retained[keyed[i].second].insert(t);
  }
  for (std::size_t a : leakers)
    if (plan.retained[a].empty())
      throw Error(Errc::ConfigError, "per-type retention quotas leave a leaky app without any retained type");

  // Decoys plant leaky-looking code so a gate bypass would show up as errors.
  for (std::size_t a = 0; a < n; ++a)
    if (plan.decoy[a]) plan.retained[a] = {kAllMetadataTypes[rng.below(kAllMetadataTypes.size())]};
  return plan;
}

std::size_t CorpusManifest::leaky_count() const {
  return static_cast<std::size_t>(std::count_if(apps.begin(), apps.end(), [](const CorpusApp& a) { return a.leaky; }));
}

std::string CorpusManifest::to_json() const {
  ordered_json spec_json;
  spec_json["app_count"] = spec.app_count;
  spec_json["leak_rate"] = spec.leak_rate;
  spec_json["seed"] = spec.seed;
  spec_json["gate_fail_rate"] = spec.gate_fail_rate;
  ordered_json retention = ordered_json::object();
  for (MetadataType t : kAllMetadataTypes)
    if (auto it = spec.per_type_retention.find(t); it != spec.per_type_retention.end())
      retention[std::string(to_string(t))] = it->second;
  spec_json["per_type_retention"] = retention;

  ordered_json list = ordered_json::array();
  for (const CorpusApp& a : apps) {
    ordered_json j;
    j["app_id"] = a.app_id;
    j["package_name"] = a.package_name;
    j["apk"] = a.apk;
    j["source_dir"] = a.source_dir;
    j["original_image"] = a.original_image;
    j["shared_image"] = a.shared_image;
    j["gate_expected"] = a.gate_expected;
    j["leaky"] = a.leaky;
    j["retained"] = to_strings(a.retained);
    ordered_json ev = ordered_json::object();
    for (MetadataType t : kAllMetadataTypes) ev[std::string(to_string(t))] = to_string(a.expected_verdict.at(t));
    j["expected_verdict"] = ev;
    list.push_back(std::move(j));
  }
  ordered_json doc;
  doc["format"] = "exifaudit-corpus-v1";
  doc["spec"] = spec_json;
  doc["leaky_count"] = leaky_count();
  doc["apps"] = list;
  return doc.dump(2) + "\n";
}

CorpusManifest CorpusManifest::from_json(std::string_view text) {
  try {
    auto doc = nlohmann::json::parse(text);
    if (doc.at("format") != "exifaudit-corpus-v1") throw Error(Errc::ConfigError, "unsupported corpus manifest format");
    CorpusManifest m;
    const auto& s = doc.at("spec");
    m.spec.app_count = s.at("app_count").get<std::size_t>();
    m.spec.leak_rate = s.at("leak_rate").get<double>();
    m.spec.seed = s.at("seed").get<std::uint64_t>();
    m.spec.gate_fail_rate = s.at("gate_fail_rate").get<double>();
    m.spec.per_type_retention.clear();
    for (const auto& [k, v] : s.at("per_type_retention").items()) {
      auto t = parse_metadata_type(k);
      if (!t) throw Error(Errc::ConfigError, "unknown metadata type " + k);
      m.spec.per_type_retention[*t] = v.get<double>();
    }
    for (const auto& j : doc.at("apps")) {
      CorpusApp a;
      a.app_id = j.at("app_id").get<std::string>();
      a.package_name = j.at("package_name").get<std::string>();
      a.apk = j.at("apk").get<std::string>();
      a.source_dir = j.at("source_dir").get<std::string>();
      a.original_image = j.at("original_image").get<std::string>();
      a.shared_image = j.at("shared_image").get<std::string>();
      a.gate_expected = j.at("gate_expected").get<bool>();
      a.leaky = j.at("leaky").get<bool>();
      for (const auto& name : j.at("retained")) {
        auto t = parse_metadata_type(name.get<std::string>());
        if (!t) throw Error(Errc::ConfigError, "unknown metadata type in retained list");
        a.retained.insert(*t);
      }
      for (MetadataType t : kAllMetadataTypes) {
        auto d = parse_disposition(j.at("expected_verdict").at(std::string(to_string(t))).get<std::string>());
        if (!d) throw Error(Errc::ConfigError, "bad expected disposition for " + a.app_id);
        a.expected_verdict[t] = *d;
      }
      m.apps.push_back(std::move(a));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("malformed corpus manifest: ") + e.what());
  }
}

CorpusManifest load_corpus_manifest(const fs::path& corpus_root) {
  fs::path p = corpus_root / kCorpusManifestName;
  Bytes b;
  try {
    b = read_file(p.string());
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, "cannot read corpus manifest " + p.string() + ": " + e.what());
  }
  return CorpusManifest::from_json(to_string(b));
}

// ---- per-app content ----

namespace {

constexpr char kExifClass[] = "Landroid/media/ExifInterface;";

struct TypeCode {
  MetadataType type;
  const char* suffix;                    // method-name suffix
  std::vector<std::string> strip_tags;   // every tag cleared when stripping
  std::vector<std::string> read_tags;    // one is read when retaining
  const char* getter;                    // typed getter alternative, may be null
};

const std::vector<TypeCode>& type_codes() {
  static const std::vector<TypeCode> codes = {
      {MetadataType::DateTime, "Timestamp", {"TAG_DATETIME", "TAG_DATETIME_ORIGINAL"}, {"TAG_DATETIME", "TAG_DATETIME_ORIGINAL"}, nullptr},
      {MetadataType::SmartphoneModel, "DeviceModel", {"TAG_MODEL"}, {"TAG_MODEL"}, nullptr},
      {MetadataType::SmartphoneBrand, "Vendor", {"TAG_MAKE"}, {"TAG_MAKE"}, nullptr},
      {MetadataType::DeviceSerialNumber, "BodyId", {"TAG_BODY_SERIAL_NUMBER"}, {"TAG_BODY_SERIAL_NUMBER"}, nullptr},
      {MetadataType::Gps,
       "Location",
       {"TAG_GPS_LATITUDE", "TAG_GPS_LATITUDE_REF", "TAG_GPS_LONGITUDE", "TAG_GPS_LONGITUDE_REF", "TAG_GPS_ALTITUDE"},
       {"TAG_GPS_LATITUDE", "TAG_GPS_LONGITUDE"},
       "getLatLong"},
  };
  return codes;
}

struct AppContent {
  std::string java_activity;
  std::string java_uploader;
  Bytes dex;
};

AppContent render_code(const std::string& package, const TypeSet& retained, Rng& rng) {
  const bool qualified = rng.coin();
  const std::string q = qualified ? "ExifInterface." : "";
  const std::string var = rng.pick(std::vector<std::string>{"exif", "meta", "ei", "attrs"});
  const std::string photo = rng.pick(std::vector<std::string>{"photo", "file", "image", "picked"});
  std::string dex_pkg = package;
  std::replace(dex_pkg.begin(), dex_pkg.end(), '.', '/');
  const std::string activity_desc = "L" + dex_pkg + "/PhotoShareActivity;";
  const std::string uploader_desc = "L" + dex_pkg + "/Uploader;";

  std::vector<const TypeCode*> order;
  for (const TypeCode& tc : type_codes()) order.push_back(&tc);
  rng.shuffle(order);

  std::ostringstream body;
  std::vector<std::string> calls;
  dex::ClassSpec activity{activity_desc, {}};
  for (const TypeCode* tc : order) {
    bool keep = retained.contains(tc->type);
    std::string name = std::string(keep ? "forward" : "scrub") + tc->suffix;
    calls.push_back(name);
    dex::MethodSpec m{name, {}};
    body << "    private void " << name << "(File " << photo << ") throws IOException {\n"
         << "        ExifInterface " << var << " = new ExifInterface(" << photo << ".getAbsolutePath());\n";
    if (keep) {
      bool use_getter = tc->getter && rng.coin();
      if (use_getter) {
        body << "        float[] latLong = new float[2];\n"
             << "        if (" << var << "." << tc->getter << "(latLong)) {\n"
             << "            uploader.uploadImage(" << photo << ", latLong[0], latLong[1]);\n"
             << "        }\n";
        m.code.push_back(dex::Insn::invoke(kExifClass, tc->getter));
      } else {
        const std::string& tag = rng.pick(tc->read_tags);
        body << "        String value = " << var << ".getAttribute(" << q << tag << ");\n"
             << "        uploader.uploadImage(" << photo << ", value);\n";
        m.code.push_back(dex::Insn::sget(kExifClass, tag));
        m.code.push_back(dex::Insn::invoke(kExifClass, "getAttribute"));
      }
    } else {
      for (const std::string& tag : tc->strip_tags) {
        body << "        " << var << ".setAttribute(" << q << tag << ", null);\n";
        m.code.push_back(dex::Insn::sget(kExifClass, tag));
        m.code.push_back(dex::Insn::invoke(kExifClass, "setAttribute"));
      }
      body << "        " << var << ".saveAttributes();\n"
           << "        uploader.uploadImage(" << photo << ");\n";
      m.code.push_back(dex::Insn::invoke(kExifClass, "saveAttributes"));
    }
    m.code.push_back(dex::Insn::invoke(uploader_desc, "uploadImage"));
    body << "    }\n\n";
    activity.methods.push_back(std::move(m));
  }

  std::ostringstream java;
  java << "package " << package << ";\n\n"
       << "import android.media.ExifInterface;\n"
       << "import java.io.File;\n"
       << "import java.io.IOException;\n";
  if (!qualified) java << "\nimport static android.media.ExifInterface.*;\n";
  java << "\npublic class PhotoShareActivity {\n"
       << "    private final Uploader uploader = new Uploader();\n\n"
       << body.str()
       << "    public void onShare(File " << photo << ") throws IOException {\n";
  for (const std::string& c : calls) java << "        " << c << "(" << photo << ");\n";
  java << "    }\n}\n";

  std::ostringstream up;
  up << "package " << package << ";\n\n"
     << "import java.io.File;\n"
     << "import java.io.IOException;\n"
     << "import java.io.OutputStream;\n"
     << "import java.net.HttpURLConnection;\n"
     << "import java.net.URL;\n"
     << "import java.nio.file.Files;\n\n"
     << "class Uploader {\n"
     << "    void uploadImage(File file, Object... extras) throws IOException {\n"
     << "        HttpURLConnection conn = (HttpURLConnection) new URL(\"https://upload.example.invalid/photos\").openConnection();\n"
     << "        conn.setDoOutput(true);\n"
     << "        try (OutputStream out = conn.getOutputStream()) {\n"
     << "            out.write(Files.readAllBytes(file.toPath()));\n"
     << "        }\n"
     << "        conn.getResponseCode();\n"
     << "    }\n"
     << "}\n";

  dex::ClassSpec uploader{uploader_desc, {{"uploadImage",
                                           {dex::Insn::const_string("https://upload.example.invalid/photos"),
                                            dex::Insn::invoke("Ljava/net/URL;", "openConnection")}}}};
  activity.methods.push_back({"onShare", {}});
  for (const std::string& c : calls) activity.methods.back().code.push_back(dex::Insn::invoke(activity_desc, c));

  return {java.str(), up.str(), dex::build_dex({activity, uploader})};
}

axml::ManifestFixture manifest_for(const std::string& package, bool decoy, Rng& rng) {
  axml::ManifestFixture f;
  f.package_name = package;
  f.permissions = {"android.permission.READ_EXTERNAL_STORAGE", "android.permission.WRITE_EXTERNAL_STORAGE",
                   "android.permission.INTERNET"};
  f.mime_types = {rng.coin() ? "image/*" : "image/jpeg"};
  if (rng.coin()) f.permissions.push_back("android.permission.CAMERA");
  if (rng.coin()) f.permissions.push_back("android.permission.ACCESS_FINE_LOCATION");
  if (rng.coin()) f.mime_types.push_back("text/plain");
  if (decoy) {
    switch (rng.below(4)) {
      case 0: f.permissions.erase(f.permissions.begin() + 2); break;  // no INTERNET
      case 1: f.permissions.erase(f.permissions.begin() + 1); break;  // no WRITE
      case 2: f.mime_types = {"application/pdf"}; break;
      default: f.mime_types.clear(); break;
    }
  }
  f.activity_count = 1 + rng.below(3);
  f.utf8_pool = rng.coin();
  return f;
}

ExifContents camera_metadata(Rng& rng) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> vendors = {
      {"Google", {"Pixel 7", "Pixel 8 Pro"}},
      {"samsung", {"SM-S911B", "SM-A546B"}},
      {"Xiaomi", {"2201117TG", "23049PCD8G"}},
      {"OnePlus", {"CPH2449"}},
      {"motorola", {"moto g54 5G"}},
  };
  const auto& [make, models] = rng.pick(vendors);
  ExifContents c;
  c.make = make;
  c.model = rng.pick(models);
  char buf[32];
  std::snprintf(buf, sizeof buf, "20%02d:%02d:%02d %02d:%02d:%02d", rng.range(18, 25), rng.range(1, 12),
                rng.range(1, 28), rng.range(0, 23), rng.range(0, 59), rng.range(0, 59));
  c.datetime = buf;
  std::string serial;
  for (int i = 0; i < 12; ++i) serial.push_back("0123456789ABCDEF"[rng.below(16)]);
  c.serial = serial;
  c.gps = GpsFix{rng.unit() * 160.0 - 80.0, rng.unit() * 358.0 - 179.0, rng.unit() * 2500.0};
  c.orientation = static_cast<std::uint16_t>(rng.pick(std::vector<int>{1, 3, 6, 8}));
  c.byte_order = rng.coin() ? Endian::Little : Endian::Big;
  return c;
}

JpegSpec picture(Rng& rng) {
  JpegSpec s;
  s.width = static_cast<std::uint16_t>(8 * rng.range(2, 8));
  s.height = static_cast<std::uint16_t>(8 * rng.range(2, 6));
  s.dc_levels.clear();
  int count = rng.range(1, 16);
  for (int i = 0; i < count; ++i) s.dc_levels.push_back(rng.range(-60, 60));
  return s;
}

void write_or_fail(const fs::path& p, ByteView data) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + p.parent_path().string() + ": " + ec.message());
  write_file_atomic(p.string(), data);
}

}  // namespace

CorpusManifest synthesize_corpus(const SyntheticCorpusSpec& spec, const fs::path& out_dir, std::size_t parallelism) {
  CorpusPlan plan = plan_corpus(spec);
  CorpusManifest manifest;
  manifest.spec = spec;
  manifest.apps.resize(spec.app_count);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

  parallel_for(spec.app_count, parallelism, [&](std::size_t i) {
    Rng rng(spec.seed, i + 1);
    char id[32];
    std::snprintf(id, sizeof id, "app-%04zu", i);
    char pkg[48];
    std::snprintf(pkg, sizeof pkg, "com.synth.a%04zu", i);

    CorpusApp& app = manifest.apps[i];
    app.app_id = id;
    app.package_name = pkg;
    const std::string root = std::string("apps/") + id;
    app.apk = root + "/app.apk";
    app.source_dir = root + "/src";
    app.original_image = root + "/images/original.jpg";
    app.shared_image = root + "/images/shared.jpg";
    app.gate_expected = !plan.decoy[i];
    app.leaky = plan.leaky[i];
    app.retained = plan.retained[i];
    for (MetadataType t : kAllMetadataTypes)
      app.expected_verdict[t] = !app.gate_expected   ? Disposition::Unknown
                                : app.retained.contains(t) ? Disposition::Retained
                                                           : Disposition::Removed;

    AppContent code = render_code(app.package_name, app.retained, rng);
    axml::ManifestFixture mf = manifest_for(app.package_name, plan.decoy[i], rng);
    zip::Writer zw;
    zw.add(kManifestEntry, axml::encode_manifest(mf), zip::Method::Deflated);
    zw.add("classes.dex", code.dex, zip::Method::Deflated);
    Bytes apk = std::move(zw).finish();

    ExifContents camera = camera_metadata(rng);
    Bytes original = encode_jpeg(picture(rng), camera);
    Bytes shared = with_exif(original, restrict_to(camera, app.retained));

    std::string pkg_dir = app.package_name;
    std::replace(pkg_dir.begin(), pkg_dir.end(), '.', '/');
    const fs::path base = out_dir / root;
    write_or_fail(base / "app.apk", apk);
    write_or_fail(base / "src" / pkg_dir / "PhotoShareActivity.java", as_bytes(code.java_activity));
    write_or_fail(base / "src" / pkg_dir / "Uploader.java", as_bytes(code.java_uploader));
    write_or_fail(base / "images/original.jpg", original);
    write_or_fail(base / "images/shared.jpg", shared);
  });

  write_file_atomic((out_dir / kCorpusManifestName).string(), manifest.to_json());
  return manifest;
}

}  // namespace exifaudit
