#include "io.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"
#include "qbm/errors.hpp"

namespace qbm::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, sep)) out.push_back(trim(cell));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::int64_t parse_int(const std::string& text, const std::string& key) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument("--" + key + ": expected an integer, got '" + text + "'");
    return v;
}

std::string json_scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_number(v.get<double>());
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw std::invalid_argument("config values must be scalars");
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool Config::has(const std::string& key) const {
    const auto it = values.find(key);
    return it != values.end() && !it->second.empty();
}

const std::string& Config::text(const std::string& key) const {
    static const std::string empty;
    const auto it = values.find(key);
    return it == values.end() ? empty : it->second;
}

double Config::number(const std::string& key) const {
    const std::string& s = text(key);
    if (s.empty()) throw std::invalid_argument("--" + key + " is required");
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw std::invalid_argument("--" + key + ": expected a finite number, got '" + s + "'");
    return v;
}

std::int64_t Config::integer(const std::string& key) const {
    const std::string& s = text(key);
    if (s.empty()) throw std::invalid_argument("--" + key + " is required");
    return parse_int(s, key);
}

std::uint64_t Config::unsigned_integer(const std::string& key) const {
    const std::string& s = text(key);
    if (s.empty()) throw std::invalid_argument("--" + key + " is required");
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("--" + key + ": expected a non-negative integer, got '" + s + "'");
    return v;
}

std::vector<std::int64_t> Config::integer_list(const std::string& key) const {
    const std::string& s = text(key);
    std::vector<std::int64_t> out;
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) throw std::invalid_argument("--" + key + ": range must be start:stop:step");
        const auto a = parse_int(parts[0], key), b = parse_int(parts[1], key), st = parse_int(parts[2], key);
        if (st <= 0 || a > b) throw std::invalid_argument("--" + key + ": empty range '" + s + "'");
        for (auto v = a; v <= b; v += st) out.push_back(v);
    } else {
        for (const auto& p : split(s, ',')) out.push_back(parse_int(p, key));
    }
    if (out.empty()) throw std::invalid_argument("--" + key + " is empty");
    for (auto v : out)
        if (v <= 0) throw std::invalid_argument("--" + key + ": values must be positive");
    return out;
}

ConfigFile load_config_file(const std::string& path) {
    const std::string text = read_file(path);
    ConfigFile cfg;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument(path + ": " + e.what());
        }
        // A fit report carries its manifest as a member.
        if (j.contains("manifest")) j = j["manifest"];
        if (j.contains("command")) cfg.command = j["command"].get<std::string>();
        const auto& body = j.contains("config") ? j["config"] : j;
        for (const auto& [k, v] : body.items())
            if (k != "command") cfg.entries[k] = json_scalar_text(v);
        return cfg;
    }
    std::istringstream in(text);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(n) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument(path + ":" + std::to_string(n) + ": empty key");
        if (key == "command")
            cfg.command = value;
        else
            cfg.entries[key] = value;
    }
    return cfg;
}

void OutputSet::add(std::string path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

void OutputSet::commit() {
    std::vector<fs::path> temps;
    const auto discard = [&] {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
    };
    try {
        for (const auto& [path, content] : files_) {
            fs::path tmp = path;
            tmp += ".tmp." + std::to_string(::getpid());
            temps.push_back(tmp);
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw DataError("cannot write " + path);
            f << content;
            f.close();
            if (!f) throw DataError("cannot write " + path);
        }
        for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(temps[i], files_[i].first);
    } catch (const fs::filesystem_error& e) {
        discard();
        throw DataError(e.what());
    } catch (...) {
        discard();
        throw;
    }
}

CsvWriter::CsvWriter(const std::string& comment) { text_ = "# " + comment + "\n"; }

void CsvWriter::header(const std::vector<std::string>& names) {
    width_ = names.size();
    for (std::size_t i = 0; i < names.size(); ++i) text_ += (i ? "," : "") + names[i];
    text_ += '\n';
}

void CsvWriter::row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(format_number(v));
    row(s);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("CsvWriter: row width differs from header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
    ++rows_;
}

std::optional<std::size_t> NumericTable::find(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    return std::nullopt;
}

std::vector<double> NumericTable::column(std::size_t i) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[i]);
    return out;
}

NumericTable parse_numeric_table(const std::string& text) {
    NumericTable t;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto cells = split(s, ',');
        if (!have_header) {
            t.columns = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw DataError("line " + std::to_string(n) + ": expected " + std::to_string(t.columns.size()) +
                            " fields, found " + std::to_string(cells.size()));
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0;
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc{} || ptr != c.data() + c.size() || c.empty())
                throw DataError("line " + std::to_string(n) + ": '" + c + "' is not a number");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw DataError("empty file");
    return t;
}

}  // namespace qbm::cli
