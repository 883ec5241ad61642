// Copyright 2026 The SALEM Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "salem/table_io.h"

#include <bit>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <iterator>

#include "salem/config.h"

using namespace salem;

namespace {

constexpr char MAGIC[8] = {'S', 'A', 'L', 'E', 'M', 'J', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "The table format assumes a little-endian host.");

template <typename T>
void put(std::string &buf, T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

struct Reader {
    const std::string &buf;
    size_t pos = 0;

    template <typename T>
    T get() {
        if (pos + sizeof(T) > buf.size()) {
            throw TableIoError("Table file is truncated.");
        }
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
};

std::string stem_of(const std::string &path) {
    for (const char *ext : {".bin", ".json"}) {
        size_t n = std::strlen(ext);
        if (path.size() > n && path.compare(path.size() - n, n, ext) == 0) {
            return path.substr(0, path.size() - n);
        }
    }
    return path;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TableIoError("Cannot open '" + path + "'.");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void salem::save_table(const JointTable &t, const std::string &stem, const std::string &config_hash) {
    std::string buf(MAGIC, sizeof(MAGIC));
    put<uint32_t>(buf, t.num_slots);
    put<uint32_t>(buf, t.num_cosets);
    put<int32_t>(buf, t.max_weight);
    put<double>(buf, t.eps_ph);
    put<uint64_t>(buf, t.records.size());
    for (const auto &r : t.records) {
        put<uint64_t>(buf, r.executed);
        put<uint64_t>(buf, r.bits);
    }
    for (uint32_t c = 0; c < t.num_cosets; c++) {
        put<double>(buf, t.missing[c]);
        put<uint32_t>(buf, t.ideal_record[c]);
        put<uint32_t>(buf, t.ideal_out[c]);
        put<uint64_t>(buf, t.rows[c].size());
        for (const auto &e : t.rows[c]) {
            put<uint32_t>(buf, e.record);
            put<uint32_t>(buf, e.out);
            put<double>(buf, e.probability);
        }
    }
    std::ofstream bin(stem + ".bin", std::ios::binary);
    bin.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!bin) {
        throw TableIoError("Cannot write '" + stem + ".bin'.");
    }

    nlohmann::json index = t.index_json();
    index["format"] = "salem-joint-table-1";
    index["bytes"] = buf.size();
    index["fnv1a"] = fmt::format("{:016x}", fnv1a(buf));
    index["config_hash"] = config_hash;
    std::ofstream js(stem + ".json");
    js << index.dump(2) << "\n";
    if (!js) {
        throw TableIoError("Cannot write '" + stem + ".json'.");
    }
}

JointTable salem::load_table(const std::string &path) {
    std::string stem = stem_of(path);
    std::string buf = read_file(stem + ".bin");
    nlohmann::json index;
    try {
        index = nlohmann::json::parse(read_file(stem + ".json"));
    } catch (const nlohmann::json::exception &e) {
        throw TableIoError(std::string("Bad table index: ") + e.what());
    }
    if (index.value("fnv1a", "") != fmt::format("{:016x}", fnv1a(buf))) {
        throw TableIoError("Table checksum does not match its index.");
    }
    if (buf.compare(0, sizeof(MAGIC), std::string(MAGIC, sizeof(MAGIC))) != 0) {
        throw TableIoError("Not a joint-table file.");
    }
    Reader r{buf, sizeof(MAGIC)};
    JointTable t;
    t.num_slots = r.get<uint32_t>();
    t.num_cosets = r.get<uint32_t>();
    t.max_weight = r.get<int32_t>();
    t.eps_ph = r.get<double>();
    uint64_t nr = r.get<uint64_t>();
    t.records.resize(nr);
    for (auto &k : t.records) {
        k.executed = r.get<uint64_t>();
        k.bits = r.get<uint64_t>();
    }
    t.rows.resize(t.num_cosets);
    t.missing.resize(t.num_cosets);
    t.ideal_record.resize(t.num_cosets);
    t.ideal_out.resize(t.num_cosets);
    for (uint32_t c = 0; c < t.num_cosets; c++) {
        t.missing[c] = r.get<double>();
        t.ideal_record[c] = r.get<uint32_t>();
        t.ideal_out[c] = r.get<uint32_t>();
        uint64_t n = r.get<uint64_t>();
        t.rows[c].resize(n);
        for (auto &e : t.rows[c]) {
            e.record = r.get<uint32_t>();
            e.out = r.get<uint32_t>();
            e.probability = r.get<double>();
            if (e.record >= nr || e.out >= t.num_cosets) {
                throw TableIoError("Table entry out of range.");
            }
        }
    }
    if (r.pos != buf.size()) {
        throw TableIoError("Trailing bytes in table file.");
    }
    return t;
}
