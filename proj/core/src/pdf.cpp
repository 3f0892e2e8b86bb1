// Copyright 2026 the groundqa authors
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

#include "groundqa/pdf.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <cctype>
#include <set>
#include <unordered_map>

#include "groundqa/error.hpp"

namespace groundqa::pdf {

namespace {

// Raised for local syntax errors; object scanning recovers from it, the
// public entry point never lets it escape.
struct SyntaxError {
    std::string what;
};

// ---------------------------------------------------------------------------
// Object model

enum class Kind { kNull, kBool, kNumber, kName, kString, kArray, kDict, kRef, kStream, kKeyword };

struct Object {
    Kind kind = Kind::kNull;
    bool boolean = false;
    double number = 0.0;
    std::string str;                // name / string bytes / keyword
    std::vector<Object> items;      // array items or dict values
    std::vector<std::string> keys;  // dict keys (streams carry their dict here too)
    int ref_num = 0;
    std::shared_ptr<const std::string> stream;  // raw, undecoded stream bytes

    bool is_dict() const { return kind == Kind::kDict || kind == Kind::kStream; }
    bool is_keyword(std::string_view k) const { return kind == Kind::kKeyword && str == k; }
    bool is_name(std::string_view n) const { return kind == Kind::kName && str == n; }

    const Object* get(std::string_view key) const {
        if (!is_dict()) return nullptr;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i] == key) return &items[i];
        }
        return nullptr;
    }
};

const Object kNullObject{};

// ---------------------------------------------------------------------------
// Lexing and parsing

bool is_ws(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0'; }
bool is_delim(char c) {
    return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' || c == '}' || c == '/' ||
           c == '%';
}
bool is_regular(char c) { return !is_ws(c) && !is_delim(c); }

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

class Parser {
  public:
    Parser(std::string_view data, std::size_t pos, bool file_level)
        : data_(data), pos_(pos), file_level_(file_level) {}

    std::size_t pos() const { return pos_; }
    void set_pos(std::size_t p) { pos_ = p; }
    bool at_end() {
        skip_ws();
        return pos_ >= data_.size();
    }

    void skip_ws() {
        while (pos_ < data_.size()) {
            if (is_ws(data_[pos_])) {
                ++pos_;
            } else if (data_[pos_] == '%') {
                while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
            } else {
                break;
            }
        }
    }

    /// One object. Bare words other than true/false/null come back as
    /// keywords (content-stream operators, "endobj", "R", ...).
    Object parse(int depth = 0) {
        if (depth > 256) throw SyntaxError{"nesting too deep"};
        skip_ws();
        if (pos_ >= data_.size()) throw SyntaxError{"unexpected end of data"};
        const char c = data_[pos_];
        if (c == '/') return parse_name();
        if (c == '(') return parse_literal_string();
        if (c == '<') {
            if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') return parse_dict(depth);
            return parse_hex_string();
        }
        if (c == '[') {
            ++pos_;
            Object arr;
            arr.kind = Kind::kArray;
            for (;;) {
                skip_ws();
                if (pos_ >= data_.size()) throw SyntaxError{"unterminated array"};
                if (data_[pos_] == ']') {
                    ++pos_;
                    return arr;
                }
                arr.items.push_back(parse(depth + 1));
            }
        }
        if (c == ']' || c == '>' || c == ')' || c == '{' || c == '}') {
            ++pos_;
            Object k;
            k.kind = Kind::kKeyword;
            k.str = std::string(1, c);
            return k;
        }
        if (c == '+' || c == '-' || c == '.' || (c >= '0' && c <= '9')) return parse_number_or_ref();
        std::size_t end = pos_;
        while (end < data_.size() && is_regular(data_[end])) ++end;
        std::string word(data_.substr(pos_, end - pos_));
        pos_ = end;
        Object o;
        if (word == "true" || word == "false") {
            o.kind = Kind::kBool;
            o.boolean = word == "true";
        } else if (word == "null") {
            o.kind = Kind::kNull;
        } else {
            o.kind = Kind::kKeyword;
            o.str = std::move(word);
        }
        return o;
    }

  private:
    Object parse_name() {
        ++pos_;
        Object o;
        o.kind = Kind::kName;
        while (pos_ < data_.size() && is_regular(data_[pos_])) {
            if (data_[pos_] == '#' && pos_ + 2 < data_.size() && hex_value(data_[pos_ + 1]) >= 0 &&
                hex_value(data_[pos_ + 2]) >= 0) {
                o.str.push_back(static_cast<char>(hex_value(data_[pos_ + 1]) * 16 + hex_value(data_[pos_ + 2])));
                pos_ += 3;
            } else {
                o.str.push_back(data_[pos_++]);
            }
        }
        return o;
    }

    Object parse_literal_string() {
        ++pos_;
        Object o;
        o.kind = Kind::kString;
        int nesting = 1;
        while (pos_ < data_.size()) {
            char c = data_[pos_++];
            if (c == '\\') {
                if (pos_ >= data_.size()) break;
                char e = data_[pos_++];
                switch (e) {
                    case 'n': o.str.push_back('\n'); break;
                    case 'r': o.str.push_back('\r'); break;
                    case 't': o.str.push_back('\t'); break;
                    case 'b': o.str.push_back('\b'); break;
                    case 'f': o.str.push_back('\f'); break;
                    case '\r':
                        if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
                        break;
                    case '\n': break;
                    default:
                        if (e >= '0' && e <= '7') {
                            int v = e - '0';
                            for (int k = 0; k < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++k) {
                                v = v * 8 + (data_[pos_++] - '0');
                            }
                            o.str.push_back(static_cast<char>(v & 0xFF));
                        } else {
                            o.str.push_back(e);
                        }
                }
                continue;
            }
            if (c == '(') {
                ++nesting;
            } else if (c == ')') {
                if (--nesting == 0) return o;
            } else if (c == '\r') {
                if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
                c = '\n';
            }
            o.str.push_back(c);
        }
        throw SyntaxError{"unterminated string"};
    }

    Object parse_hex_string() {
        ++pos_;
        Object o;
        o.kind = Kind::kString;
        int hi = -1;
        while (pos_ < data_.size() && data_[pos_] != '>') {
            const int v = hex_value(data_[pos_++]);
            if (v < 0) continue;
            if (hi < 0) {
                hi = v;
            } else {
                o.str.push_back(static_cast<char>(hi * 16 + v));
                hi = -1;
            }
        }
        if (pos_ >= data_.size()) throw SyntaxError{"unterminated hex string"};
        ++pos_;
        if (hi >= 0) o.str.push_back(static_cast<char>(hi * 16));
        return o;
    }

    Object parse_dict(int depth) {
        pos_ += 2;
        Object d;
        d.kind = Kind::kDict;
        for (;;) {
            skip_ws();
            if (pos_ + 1 < data_.size() && data_[pos_] == '>' && data_[pos_ + 1] == '>') {
                pos_ += 2;
                break;
            }
            if (pos_ >= data_.size()) throw SyntaxError{"unterminated dictionary"};
            Object key = parse(depth + 1);
            if (key.kind != Kind::kName) throw SyntaxError{"dictionary key is not a name"};
            skip_ws();
            if (pos_ + 1 < data_.size() && data_[pos_] == '>' && data_[pos_ + 1] == '>') {
                d.keys.push_back(std::move(key.str));
                d.items.emplace_back();
                continue;
            }
            d.keys.push_back(std::move(key.str));
            d.items.push_back(parse(depth + 1));
        }
        if (file_level_) maybe_read_stream(d);
        return d;
    }

    void maybe_read_stream(Object& dict) {
        const std::size_t save = pos_;
        skip_ws();
        if (data_.compare(pos_, 6, "stream") != 0) {
            pos_ = save;
            return;
        }
        pos_ += 6;
        if (pos_ < data_.size() && data_[pos_] == '\r') ++pos_;
        if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
        const std::size_t start = pos_;
        std::size_t end = std::string_view::npos;
        if (const Object* len = dict.get("Length"); len && len->kind == Kind::kNumber && len->number >= 0) {
            const auto n = static_cast<std::size_t>(len->number);
            if (start + n <= data_.size()) {
                std::size_t after = start + n;
                while (after < data_.size() && is_ws(data_[after])) ++after;
                if (data_.compare(after, 9, "endstream") == 0) end = start + n;
            }
        }
        if (end == std::string_view::npos) {
            const auto marker = data_.find("endstream", start);
            if (marker == std::string_view::npos) throw SyntaxError{"stream without endstream"};
            end = marker;
            if (end > start && data_[end - 1] == '\n') --end;
            if (end > start && data_[end - 1] == '\r') --end;
        }
        dict.kind = Kind::kStream;
        dict.stream = std::make_shared<const std::string>(data_.substr(start, end - start));
        const auto marker = data_.find("endstream", end);
        pos_ = marker == std::string_view::npos ? data_.size() : marker + 9;
    }

    Object parse_number_or_ref() {
        std::size_t end = pos_;
        while (end < data_.size() && (std::isdigit(static_cast<unsigned char>(data_[end])) || data_[end] == '.' ||
                                      data_[end] == '+' || data_[end] == '-')) {
            ++end;
        }
        const std::string token(data_.substr(pos_, end - pos_));
        pos_ = end;
        Object o;
        o.kind = Kind::kNumber;
        o.number = std::strtod(token.c_str(), nullptr);
        const bool integer = token.find('.') == std::string::npos && token.find_first_of("+-") == std::string::npos;
        if (!integer) return o;
        // "N G R" is an indirect reference.
        const std::size_t save = pos_;
        skip_ws();
        std::size_t p = pos_;
        while (p < data_.size() && std::isdigit(static_cast<unsigned char>(data_[p]))) ++p;
        if (p > pos_ && p < data_.size() && is_ws(data_[p])) {
            std::size_t q = p;
            while (q < data_.size() && is_ws(data_[q])) ++q;
            if (q < data_.size() && data_[q] == 'R' && (q + 1 >= data_.size() || !is_regular(data_[q + 1]))) {
                o.kind = Kind::kRef;
                o.ref_num = static_cast<int>(o.number);
                pos_ = q + 1;
                return o;
            }
        }
        pos_ = save;
        return o;
    }

    std::string_view data_;
    std::size_t pos_;
    bool file_level_;
};

// ---------------------------------------------------------------------------
// Stream filters

std::string inflate(std::string_view in) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw SyntaxError{"zlib init failed"};
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    std::string out;
    std::array<char, 16384> buf{};
    int rc = Z_OK;
    while (rc == Z_OK) {
        zs.next_out = reinterpret_cast<Bytef*>(buf.data());
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = ::inflate(&zs, Z_NO_FLUSH);
        out.append(buf.data(), buf.size() - zs.avail_out);
        if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
    }
    inflateEnd(&zs);
    // Truncated or slightly corrupt streams still yield their decodable prefix.
    if (rc != Z_STREAM_END && out.empty()) throw SyntaxError{"corrupt Flate stream"};
    return out;
}

std::string ascii_hex_decode(std::string_view in) {
    std::string out;
    int hi = -1;
    for (char c : in) {
        if (c == '>') break;
        const int v = hex_value(c);
        if (v < 0) continue;
        if (hi < 0) {
            hi = v;
        } else {
            out.push_back(static_cast<char>(hi * 16 + v));
            hi = -1;
        }
    }
    if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
    return out;
}

std::string ascii85_decode(std::string_view in) {
    std::string out;
    std::uint32_t tuple = 0;
    int count = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const char c = in[i];
        if (c == '~') break;
        if (is_ws(c)) continue;
        if (c == 'z' && count == 0) {
            out.append(4, '\0');
            continue;
        }
        if (c < '!' || c > 'u') throw SyntaxError{"bad ASCII85 character"};
        tuple = tuple * 85 + static_cast<std::uint32_t>(c - '!');
        if (++count == 5) {
            for (int k = 3; k >= 0; --k) out.push_back(static_cast<char>((tuple >> (8 * k)) & 0xFF));
            tuple = 0;
            count = 0;
        }
    }
    if (count > 1) {
        for (int k = count; k < 5; ++k) tuple = tuple * 85 + 84;
        for (int k = 0; k < count - 1; ++k) out.push_back(static_cast<char>((tuple >> (8 * (3 - k))) & 0xFF));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Document

class Document {
  public:
    explicit Document(std::string_view data) : data_(data) {
        const auto header = data_.substr(0, 1024).find("%PDF-");
        if (header == std::string_view::npos) raise(ErrorCode::kMalformedDocument, "missing %PDF- header");
        scan_objects();
        expand_object_streams();
        find_root();
    }

    const Object& resolve(const Object& o, int depth = 0) const {
        if (o.kind != Kind::kRef) return o;
        if (depth > 32) return kNullObject;
        auto it = objects_.find(o.ref_num);
        if (it == objects_.end()) return kNullObject;
        return resolve(it->second, depth + 1);
    }

    const Object* lookup(const Object& dict, std::string_view key) const {
        const Object* v = resolve(dict).get(key);
        if (!v) return nullptr;
        const Object& r = resolve(*v);
        return r.kind == Kind::kNull ? nullptr : &r;
    }

    std::string decode(const Object& stream) const {
        if (stream.kind != Kind::kStream || !stream.stream) return {};
        std::string data = *stream.stream;
        const Object* filter = lookup(stream, "Filter");
        if (!filter) return data;
        std::vector<std::string> names;
        if (filter->kind == Kind::kName) {
            names.push_back(filter->str);
        } else if (filter->kind == Kind::kArray) {
            for (const auto& f : filter->items) {
                const Object& r = resolve(f);
                if (r.kind == Kind::kName) names.push_back(r.str);
            }
        }
        for (const auto& name : names) {
            if (name == "FlateDecode" || name == "Fl") {
                data = inflate(data);
            } else if (name == "ASCIIHexDecode" || name == "AHx") {
                data = ascii_hex_decode(data);
            } else if (name == "ASCII85Decode" || name == "A85") {
                data = ascii85_decode(data);
            } else {
                throw SyntaxError{"unsupported stream filter " + name};
            }
        }
        return data;
    }

    struct Page {
        const Object* dict;
        const Object* resources;
    };

    std::vector<Page> pages() const {
        std::vector<Page> out;
        const Object* tree = lookup(root_, "Pages");
        if (!tree || !tree->is_dict()) raise(ErrorCode::kMalformedDocument, "catalog has no page tree");
        std::set<const Object*> seen;
        collect_pages(*tree, lookup(*tree, "Resources"), out, seen, 0);
        return out;
    }

  private:
    void scan_objects() {
        std::size_t p = 0;
        while ((p = data_.find("obj", p)) != std::string_view::npos) {
            const std::size_t here = p;
            p += 3;
            if (here == 0 || !is_ws(data_[here - 1])) continue;
            if (p < data_.size() && is_regular(data_[p])) continue;
            // Walk back over "N G ".
            std::size_t q = here;
            while (q > 0 && is_ws(data_[q - 1])) --q;
            const std::size_t gen_end = q;
            while (q > 0 && std::isdigit(static_cast<unsigned char>(data_[q - 1]))) --q;
            if (q == gen_end) continue;
            const std::size_t sep = q;
            while (q > 0 && is_ws(data_[q - 1])) --q;
            if (q == sep) continue;
            const std::size_t num_end = q;
            while (q > 0 && std::isdigit(static_cast<unsigned char>(data_[q - 1]))) --q;
            if (q == num_end) continue;
            if (q > 0 && is_regular(data_[q - 1])) continue;
            const int num = std::atoi(std::string(data_.substr(q, num_end - q)).c_str());
            try {
                Parser parser(data_, p, true);
                Object obj = parser.parse();
                objects_[num] = std::move(obj);
                p = parser.pos();
            } catch (const SyntaxError&) {
                // Skip the damaged object and keep scanning.
            }
        }
    }

    void expand_object_streams() {
        std::vector<std::pair<int, Object>> found;
        for (const auto& [num, obj] : objects_) {
            if (obj.kind != Kind::kStream) continue;
            const Object* type = obj.get("Type");
            if (!type || !type->is_name("ObjStm")) continue;
            try {
                const std::string body = decode(obj);
                const Object* n = obj.get("N");
                const Object* first = obj.get("First");
                if (!n || !first || n->kind != Kind::kNumber || first->kind != Kind::kNumber) continue;
                Parser header(body, 0, false);
                std::vector<std::pair<int, std::size_t>> entries;
                for (int i = 0; i < static_cast<int>(n->number); ++i) {
                    const Object a = header.parse();
                    const Object b = header.parse();
                    entries.emplace_back(static_cast<int>(a.number), static_cast<std::size_t>(b.number));
                }
                for (const auto& [obj_num, offset] : entries) {
                    Parser p(body, static_cast<std::size_t>(first->number) + offset, false);
                    found.emplace_back(obj_num, p.parse());
                }
            } catch (const SyntaxError&) {
                continue;
            }
        }
        for (auto& [num, obj] : found) objects_.try_emplace(num, std::move(obj));
    }

    void find_root() {
        std::size_t p = data_.size();
        while (p > 0 && (p = data_.rfind("trailer", p - 1)) != std::string_view::npos) {
            try {
                Parser parser(data_, p + 7, false);
                Object trailer = parser.parse();
                if (const Object* root = trailer.get("Root")) {
                    root_ = *root;
                    if (resolve(root_).is_dict()) return;
                }
            } catch (const SyntaxError&) {
            }
            if (p == 0) break;
        }
        for (const auto& [num, obj] : objects_) {
            const Object* type = obj.get("Type");
            if (type && type->is_name("XRef")) {
                if (const Object* root = obj.get("Root"); root && resolve(*root).is_dict()) {
                    root_ = *root;
                    return;
                }
            }
        }
        for (const auto& [num, obj] : objects_) {
            const Object* type = obj.get("Type");
            if (type && type->is_name("Catalog")) {
                root_ = obj;
                return;
            }
        }
        raise(ErrorCode::kMalformedDocument, "no document catalog found");
    }

    void collect_pages(const Object& node, const Object* resources, std::vector<Page>& out,
                       std::set<const Object*>& seen, int depth) const {
        if (depth > 64 || !seen.insert(&node).second) return;
        const Object* own = lookup(node, "Resources");
        const Object* effective = own ? own : resources;
        const Object* kids = lookup(node, "Kids");
        if (kids && kids->kind == Kind::kArray) {
            for (const auto& kid : kids->items) {
                const Object& k = resolve(kid);
                if (k.is_dict()) collect_pages(k, effective, out, seen, depth + 1);
            }
            return;
        }
        const Object* type = lookup(node, "Type");
        if (type && type->is_name("Pages")) return;
        out.push_back({&node, effective});
    }

    std::string_view data_;
    std::map<int, Object> objects_;
    Object root_;
};

// ---------------------------------------------------------------------------
// Fonts

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x110000) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::vector<char32_t> utf16be_code_points(std::string_view bytes) {
    std::vector<char32_t> cps;
    for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
        char32_t u = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
        if (u >= 0xD800 && u <= 0xDBFF && i + 3 < bytes.size()) {
            const char32_t lo = (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
            if (lo >= 0xDC00 && lo <= 0xDFFF) {
                u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
                i += 2;
            }
        }
        cps.push_back(u);
    }
    return cps;
}

char32_t win_ansi(unsigned char code) {
    static constexpr std::array<char32_t, 32> k80 = {
        0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
        0x2039, 0x0152, 0,      0x017D, 0,      0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
        0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178};
    if (code < 0x20) return code == '\t' ? U' ' : 0;
    if (code >= 0x80 && code < 0xA0) return k80[code - 0x80];
    return code;
}

char32_t glyph_to_unicode(std::string_view name) {
    static const std::unordered_map<std::string_view, char32_t> kGlyphs = {
        {"space", U' '},          {"exclam", U'!'},         {"quotedbl", U'"'},       {"numbersign", U'#'},
        {"dollar", U'$'},         {"percent", U'%'},        {"ampersand", U'&'},      {"quotesingle", U'\''},
        {"parenleft", U'('},      {"parenright", U')'},     {"asterisk", U'*'},       {"plus", U'+'},
        {"comma", U','},          {"hyphen", U'-'},         {"period", U'.'},         {"slash", U'/'},
        {"zero", U'0'},           {"one", U'1'},            {"two", U'2'},            {"three", U'3'},
        {"four", U'4'},           {"five", U'5'},           {"six", U'6'},            {"seven", U'7'},
        {"eight", U'8'},          {"nine", U'9'},           {"colon", U':'},          {"semicolon", U';'},
        {"less", U'<'},           {"equal", U'='},          {"greater", U'>'},        {"question", U'?'},
        {"at", U'@'},             {"bracketleft", U'['},    {"backslash", U'\\'},     {"bracketright", U']'},
        {"asciicircum", U'^'},    {"underscore", U'_'},     {"grave", U'`'},          {"braceleft", U'{'},
        {"bar", U'|'},            {"braceright", U'}'},     {"asciitilde", U'~'},     {"quoteleft", 0x2018},
        {"quoteright", 0x2019},   {"quotedblleft", 0x201C}, {"quotedblright", 0x201D}, {"endash", 0x2013},
        {"emdash", 0x2014},       {"bullet", 0x2022},       {"ellipsis", 0x2026},     {"trademark", 0x2122},
        {"copyright", 0x00A9},    {"registered", 0x00AE},   {"degree", 0x00B0},       {"section", 0x00A7},
        {"paragraph", 0x00B6},    {"dagger", 0x2020},       {"daggerdbl", 0x2021},    {"Euro", 0x20AC},
        {"fi", 0xFB01},           {"fl", 0xFB02},           {"ff", 0xFB00},           {"ffi", 0xFB03},
        {"ffl", 0xFB04},          {"nbspace", 0x00A0},      {"minus", 0x2212},        {"periodcentered", 0x00B7},
    };
    if (name.size() == 1 && std::isalpha(static_cast<unsigned char>(name[0]))) return static_cast<char32_t>(name[0]);
    if (auto it = kGlyphs.find(name); it != kGlyphs.end()) return it->second;
    if (name.size() == 7 && name.substr(0, 3) == "uni") {
        return static_cast<char32_t>(std::strtoul(std::string(name.substr(3)).c_str(), nullptr, 16));
    }
    return 0;
}

class FontDecoder {
  public:
    FontDecoder() {
        for (int c = 0; c < 256; ++c) set_simple(static_cast<unsigned char>(c), win_ansi(static_cast<unsigned char>(c)));
    }

    static FontDecoder build(const Document& doc, const Object& font) {
        FontDecoder f;
        const Object* subtype = doc.lookup(font, "Subtype");
        if (subtype && subtype->is_name("Type0")) f.code_bytes_ = 2;
        if (const Object* enc = doc.lookup(font, "Encoding"); enc && enc->is_dict()) {
            if (const Object* diffs = doc.lookup(*enc, "Differences"); diffs && diffs->kind == Kind::kArray) {
                int code = 0;
                for (const auto& item : diffs->items) {
                    const Object& r = doc.resolve(item);
                    if (r.kind == Kind::kNumber) {
                        code = static_cast<int>(r.number);
                    } else if (r.kind == Kind::kName && code >= 0 && code < 256) {
                        if (char32_t cp = glyph_to_unicode(r.str)) f.set_simple(static_cast<unsigned char>(code), cp);
                        ++code;
                    }
                }
            }
        }
        if (const Object* tu = doc.lookup(font, "ToUnicode"); tu && tu->kind == Kind::kStream) {
            try {
                f.parse_cmap(doc.decode(*tu));
            } catch (const SyntaxError&) {
            }
        }
        return f;
    }

    void decode(std::string_view bytes, std::string& out) const {
        if (code_bytes_ == 2) {
            for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
                const std::uint32_t code =
                    (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
                if (auto it = cmap_.find(code); it != cmap_.end()) out += it->second;
            }
            return;
        }
        for (char ch : bytes) {
            const auto code = static_cast<unsigned char>(ch);
            if (auto it = cmap_.find(code); it != cmap_.end()) {
                out += it->second;
            } else {
                out += simple_[code];
            }
        }
    }

  private:
    void set_simple(unsigned char code, char32_t cp) {
        simple_[code].clear();
        if (cp) append_utf8(simple_[code], cp);
    }

    static std::uint32_t code_of(std::string_view s) {
        std::uint32_t v = 0;
        for (char c : s) v = (v << 8) | static_cast<unsigned char>(c);
        return v;
    }

    void parse_cmap(const std::string& body) {
        Parser p(body, 0, false);
        std::size_t widest = 0;
        while (!p.at_end()) {
            Object tok = p.parse();
            if (tok.is_keyword("begincodespacerange")) {
                for (;;) {
                    Object lo = p.parse();
                    if (lo.is_keyword("endcodespacerange")) break;
                    p.parse();
                    widest = std::max(widest, lo.str.size());
                }
            } else if (tok.is_keyword("beginbfchar")) {
                for (;;) {
                    Object src = p.parse();
                    if (src.is_keyword("endbfchar")) break;
                    Object dst = p.parse();
                    std::string utf8;
                    if (dst.kind == Kind::kString) {
                        for (char32_t cp : utf16be_code_points(dst.str)) append_utf8(utf8, cp);
                    } else if (dst.kind == Kind::kName) {
                        if (char32_t cp = glyph_to_unicode(dst.str)) append_utf8(utf8, cp);
                    }
                    cmap_[code_of(src.str)] = utf8;
                    widest = std::max(widest, src.str.size());
                }
            } else if (tok.is_keyword("beginbfrange")) {
                for (;;) {
                    Object lo = p.parse();
                    if (lo.is_keyword("endbfrange")) break;
                    Object hi = p.parse();
                    Object dst = p.parse();
                    const std::uint32_t a = code_of(lo.str);
                    const std::uint32_t b = code_of(hi.str);
                    if (b < a || b - a > 0xFFFF) continue;
                    widest = std::max(widest, lo.str.size());
                    for (std::uint32_t c = a; c <= b; ++c) {
                        std::string utf8;
                        if (dst.kind == Kind::kString) {
                            auto cps = utf16be_code_points(dst.str);
                            if (!cps.empty()) cps.back() += c - a;
                            for (char32_t cp : cps) append_utf8(utf8, cp);
                        } else if (dst.kind == Kind::kArray && c - a < dst.items.size()) {
                            for (char32_t cp : utf16be_code_points(dst.items[c - a].str)) append_utf8(utf8, cp);
                        }
                        cmap_[c] = utf8;
                    }
                }
            }
        }
        if (widest == 1) code_bytes_ = 1;
        if (widest >= 2) code_bytes_ = 2;
    }

    int code_bytes_ = 1;
    std::unordered_map<std::uint32_t, std::string> cmap_;
    std::array<std::string, 256> simple_;
};

// ---------------------------------------------------------------------------
// Content stream interpretation

class TextExtractor {
  public:
    explicit TextExtractor(const Document& doc) : doc_(doc) {}

    std::string page_text(const Document::Page& page) {
        out_.clear();
        last_y_.reset();
        const Object* contents = doc_.lookup(*page.dict, "Contents");
        std::string body;
        if (contents && contents->kind == Kind::kStream) {
            body = doc_.decode(*contents);
        } else if (contents && contents->kind == Kind::kArray) {
            for (const auto& part : contents->items) {
                body += doc_.decode(doc_.resolve(part));
                body.push_back('\n');
            }
        }
        run(body, page.resources, 0);
        return out_;
    }

  private:
    struct Matrix {
        double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;
    };

    void newline() {
        while (!out_.empty() && out_.back() == ' ') out_.pop_back();
        if (!out_.empty() && out_.back() != '\n') out_.push_back('\n');
    }

    void space() {
        if (!out_.empty() && out_.back() != ' ' && out_.back() != '\n') out_.push_back(' ');
    }

    void show(std::string_view bytes) {
        const double y = line_.f;
        if (force_newline_ || (last_y_ && std::fabs(y - *last_y_) > 1.0)) {
            newline();
        } else if (moved_) {
            space();
        }
        force_newline_ = false;
        moved_ = false;
        last_y_ = y;
        if (font_) {
            font_->decode(bytes, out_);
        } else {
            for (char c : bytes) append_utf8(out_, win_ansi(static_cast<unsigned char>(c)));
        }
    }

    void translate(double tx, double ty) {
        line_.e += tx * line_.a + ty * line_.c;
        line_.f += tx * line_.b + ty * line_.d;
        moved_ = true;
    }

    const FontDecoder* font_for(const Object* resources, const std::string& name) {
        if (!resources) return nullptr;
        const Object* fonts = doc_.lookup(*resources, "Font");
        if (!fonts) return nullptr;
        const Object* font = doc_.lookup(*fonts, name);
        if (!font || !font->is_dict()) return nullptr;
        auto it = fonts_.find(font);
        if (it == fonts_.end()) it = fonts_.emplace(font, FontDecoder::build(doc_, *font)).first;
        return &it->second;
    }

    static double num(const std::vector<Object>& ops, std::size_t i) {
        return i < ops.size() && ops[i].kind == Kind::kNumber ? ops[i].number : 0.0;
    }

    void run(std::string_view content, const Object* resources, int depth) {
        if (depth > 8) return;
        Parser p(content, 0, false);
        std::vector<Object> ops;
        while (!p.at_end()) {
            Object tok;
            try {
                tok = p.parse();
            } catch (const SyntaxError&) {
                break;
            }
            if (tok.kind != Kind::kKeyword) {
                ops.push_back(std::move(tok));
                continue;
            }
            const std::string& op = tok.str;
            if (op == "BT") {
                line_ = Matrix{};
                moved_ = true;
            } else if (op == "Tf" && ops.size() >= 2 && ops[ops.size() - 2].kind == Kind::kName) {
                font_ = font_for(resources, ops[ops.size() - 2].str);
            } else if (op == "TL") {
                leading_ = num(ops, 0);
            } else if (op == "Td" || op == "TD") {
                if (op == "TD") leading_ = -num(ops, 1);
                translate(num(ops, 0), num(ops, 1));
            } else if (op == "Tm" && ops.size() >= 6) {
                line_ = Matrix{num(ops, 0), num(ops, 1), num(ops, 2), num(ops, 3), num(ops, 4), num(ops, 5)};
                moved_ = true;
            } else if (op == "T*") {
                translate(0, -leading_);
                force_newline_ = true;
            } else if (op == "Tj" && !ops.empty() && ops.back().kind == Kind::kString) {
                show(ops.back().str);
            } else if ((op == "'" || op == "\"") && !ops.empty() && ops.back().kind == Kind::kString) {
                translate(0, -leading_);
                force_newline_ = true;
                show(ops.back().str);
            } else if (op == "TJ" && !ops.empty() && ops.back().kind == Kind::kArray) {
                bool first = true;
                for (const auto& item : ops.back().items) {
                    if (item.kind == Kind::kString) {
                        if (first) {
                            show(item.str);
                            first = false;
                        } else if (font_) {
                            font_->decode(item.str, out_);
                        } else {
                            for (char c : item.str) append_utf8(out_, win_ansi(static_cast<unsigned char>(c)));
                        }
                    } else if (item.kind == Kind::kNumber && item.number < -200 && !first) {
                        space();
                    }
                }
            } else if (op == "Do" && !ops.empty() && ops.back().kind == Kind::kName && resources) {
                run_form(resources, ops.back().str, depth);
            } else if (op == "BI") {
                skip_inline_image(content, p);
            }
            ops.clear();
        }
    }

    void run_form(const Object* resources, const std::string& name, int depth) {
        const Object* xobjects = doc_.lookup(*resources, "XObject");
        if (!xobjects) return;
        const Object* form = doc_.lookup(*xobjects, name);
        if (!form || form->kind != Kind::kStream) return;
        const Object* subtype = doc_.lookup(*form, "Subtype");
        if (!subtype || !subtype->is_name("Form")) return;
        const Object* own = doc_.lookup(*form, "Resources");
        const std::string body = doc_.decode(*form);
        run(body, own ? own : resources, depth + 1);
    }

    static void skip_inline_image(std::string_view content, Parser& p) {
        auto id = content.find("ID", p.pos());
        if (id == std::string_view::npos) {
            p.set_pos(content.size());
            return;
        }
        std::size_t pos = id + 2;
        for (;;) {
            auto ei = content.find("EI", pos);
            if (ei == std::string_view::npos) {
                p.set_pos(content.size());
                return;
            }
            const bool before = ei > 0 && is_ws(content[ei - 1]);
            const bool after = ei + 2 >= content.size() || is_ws(content[ei + 2]);
            if (before && after) {
                p.set_pos(ei + 2);
                return;
            }
            pos = ei + 2;
        }
    }

    const Document& doc_;
    std::string out_;
    std::map<const Object*, FontDecoder> fonts_;
    const FontDecoder* font_ = nullptr;
    Matrix line_;
    double leading_ = 0.0;
    bool moved_ = false;
    bool force_newline_ = false;
    std::optional<double> last_y_;
};

}  // namespace

std::vector<std::string> extract_page_texts(std::string_view bytes) {
    try {
        Document doc(bytes);
        TextExtractor extractor(doc);
        std::vector<std::string> pages;
        for (const auto& page : doc.pages()) pages.push_back(extractor.page_text(page));
        return pages;
    } catch (const SyntaxError& e) {
        raise(ErrorCode::kMalformedDocument, "unreadable PDF: " + e.what);
    }
}

}  // namespace groundqa::pdf
