#include "gamsum/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gamsum/error.hpp"
#include "gamsum/rng.hpp"

namespace gamsum {

namespace {

constexpr int kCurrentFormatVersion = 1;

std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw IntegrityError("model file: bad float literal '" + s + "'");
    return v;
}

std::uint64_t checksum_bytes(const std::string& payload) {
    return hash_tag(payload);
}

struct LineReader {
    std::istringstream stream;
    std::string line;
    std::size_t line_no = 0;

    explicit LineReader(const std::string& text) : stream(text) {}

    bool next() {
        if (!std::getline(stream, line)) return false;
        ++line_no;
        return true;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw IntegrityError("model file line " + std::to_string(line_no) + ": " + what);
    }
};

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) fields.push_back(f);
    return fields;
}

void write_binner(std::ostringstream& out, const char* tag, const Binner& binner) {
    out << tag << " " << binner.feature_count() << "\n";
    for (std::size_t f = 0; f < binner.feature_count(); ++f) {
        const std::vector<double>& cuts = binner.cut_points(f);
        out << tag << "_feature " << f << " " << hex_double(binner.observed_min(f)) << " "
            << hex_double(binner.observed_max(f)) << " " << cuts.size();
        for (double c : cuts) out << " " << hex_double(c);
        out << "\n";
    }
}

Binner read_binner(LineReader& in, const std::string& tag) {
    if (!in.next()) throw IntegrityError("model file: truncated before " + tag);
    std::vector<std::string> head = split_fields(in.line);
    if (head.size() != 2 || head[0] != tag) in.fail("expected '" + tag + " <count>'");
    std::size_t count = std::stoul(head[1]);
    std::vector<std::vector<double>> cuts(count);
    std::vector<double> mins(count), maxs(count);
    for (std::size_t f = 0; f < count; ++f) {
        if (!in.next()) throw IntegrityError("model file: truncated " + tag);
        std::vector<std::string> fields = split_fields(in.line);
        if (fields.size() < 5 || fields[0] != tag + "_feature") in.fail("bad " + tag + " row");
        std::size_t id = std::stoul(fields[1]);
        if (id != f) in.fail(tag + " rows out of order");
        mins[f] = parse_double(fields[2]);
        maxs[f] = parse_double(fields[3]);
        std::size_t k = std::stoul(fields[4]);
        if (fields.size() != 5 + k) in.fail("cut count mismatch");
        cuts[f].resize(k);
        for (std::size_t c = 0; c < k; ++c) cuts[f][c] = parse_double(fields[5 + c]);
    }
    Binner binner;
    binner.set_raw(std::move(cuts), std::move(mins), std::move(maxs));
    return binner;
}

} // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Ebm: return "ebm";
    case ModelKind::Gaminet: return "gaminet";
    default: return "logistic";
    }
}

ModelKind model_kind_from_string(const std::string& text) {
    if (text == "ebm") return ModelKind::Ebm;
    if (text == "gaminet") return ModelKind::Gaminet;
    if (text == "logistic") return ModelKind::Logistic;
    throw ValidationError("unknown model kind '" + text + "'");
}

std::string serialize_model(const ModelFile& file) {
    std::ostringstream out;
    out << "gamsum-model " << file.format_version << "\n";
    out << "kind " << to_string(file.kind) << "\n";
    out << "features " << file.feature_names.size();
    for (const std::string& name : file.feature_names) out << " " << name;
    out << "\n";
    out << "config " << (file.config_echo.empty() ? "-" : file.config_echo) << "\n";
    out << "intercept " << hex_double(file.model.intercept) << "\n";
    write_binner(out, "binner", file.model.binner);
    write_binner(out, "pair_binner", file.model.pair_binner);

    out << "mains " << file.model.mains.size() << "\n";
    for (const MainShape& m : file.model.mains) {
        out << "main " << m.feature << " " << m.contribution.size();
        for (double v : m.contribution) out << " " << hex_double(v);
        out << "\n";
    }
    out << "pairs " << file.model.pairs.size() << "\n";
    for (const PairShape& p : file.model.pairs) {
        out << "pair " << p.feature_i << " " << p.feature_j << " " << p.bins_i << " "
            << p.bins_j;
        for (double v : p.contribution) out << " " << hex_double(v);
        out << "\n";
    }

    out << "subnetworks " << file.subnetworks.size() << "\n";
    if (!file.subnetworks.empty()) {
        out << "native_bias " << hex_double(file.native_bias.value_or(0.0)) << "\n";
        for (const Subnetwork& net : file.subnetworks) {
            out << "subnet " << (net.kind == Subnetwork::Kind::Main ? "main" : "pair") << " "
                << net.feature_i << " " << net.feature_j << " " << net.layers.size();
            for (std::size_t l : net.layers) out << " " << l;
            out << " " << net.params.size();
            for (double v : net.params) out << " " << hex_double(v);
            out << "\n";
        }
    }

    std::string payload = out.str();
    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(checksum_bytes(payload)));
    return payload + "checksum " + checksum + "\n";
}

ModelFile parse_model(const std::string& text) {
    // Split off and verify the checksum line first.
    std::size_t mark = text.rfind("checksum ");
    if (mark == std::string::npos || mark == 0 || text[mark - 1] != '\n')
        throw IntegrityError("model file: missing checksum line");
    std::string payload = text.substr(0, mark);
    std::string checksum_line = text.substr(mark);
    char expected[32];
    std::snprintf(expected, sizeof(expected), "%016llx",
                  static_cast<unsigned long long>(checksum_bytes(payload)));
    if (checksum_line != std::string("checksum ") + expected + "\n")
        throw IntegrityError("model file: checksum mismatch, payload corrupted");

    LineReader in(payload);
    ModelFile file;

    if (!in.next()) throw IntegrityError("model file: empty");
    {
        std::vector<std::string> f = split_fields(in.line);
        if (f.size() != 2 || f[0] != "gamsum-model") in.fail("not a gamsum model file");
        file.format_version = std::stoi(f[1]);
        if (file.format_version > kCurrentFormatVersion)
            throw VersionError("model file: unsupported format version " + f[1] +
                               " (newest supported: " + std::to_string(kCurrentFormatVersion) +
                               ")");
        if (file.format_version < 1) in.fail("bad format version");
    }
    if (!in.next()) throw IntegrityError("model file: truncated header");
    {
        std::vector<std::string> f = split_fields(in.line);
        if (f.size() != 2 || f[0] != "kind") in.fail("expected 'kind'");
        file.kind = model_kind_from_string(f[1]);
    }
    if (!in.next()) throw IntegrityError("model file: truncated header");
    {
        std::vector<std::string> f = split_fields(in.line);
        if (f.size() < 2 || f[0] != "features") in.fail("expected 'features'");
        std::size_t count = std::stoul(f[1]);
        if (f.size() != 2 + count) in.fail("feature name count mismatch");
        file.feature_names.assign(f.begin() + 2, f.end());
    }
    if (!in.next()) throw IntegrityError("model file: truncated header");
    {
        if (in.line.rfind("config ", 0) != 0) in.fail("expected 'config'");
        file.config_echo = in.line.substr(7);
        if (file.config_echo == "-") file.config_echo.clear();
    }
    if (!in.next()) throw IntegrityError("model file: truncated header");
    {
        std::vector<std::string> f = split_fields(in.line);
        if (f.size() != 2 || f[0] != "intercept") in.fail("expected 'intercept'");
        file.model.intercept = parse_double(f[1]);
    }
    file.model.binner = read_binner(in, "binner");
    file.model.pair_binner = read_binner(in, "pair_binner");

    if (!in.next()) throw IntegrityError("model file: truncated before mains");
    {
        std::vector<std::string> f = split_fields(in.line);
        if (f.size() != 2 || f[0] != "mains") in.fail("expected 'mains'");
        std::size_t count = std::stoul(f[1]);
        for (std::size_t k = 0; k < count; ++k) {
            if (!in.next()) throw IntegrityError("model file: truncated main shape");
            std::vector<std::string> row = split_fields(in.line);
            if (row.size() < 3 || row[0] != "main") in.fail("bad main row");
            MainShape m;
            m.feature = std::stoul(row[1]);
            std::size_t bins = std::stoul(row[2]);
            if (row.size() != 3 + bins) in.fail("main bin count mismatch");
            m.contribution.resize(bins);
            for (std::size_t b = 0; b < bins; ++b) m.contribution[b] = parse_double(row[3 + b]);
            file.model.mains.push_back(std::move(m));
        }
    }
    if (!in.next()) throw IntegrityError("model file: truncated before pairs");
    {
        std::vector<std::string> f = split_fields(in.line);
        if (f.size() != 2 || f[0] != "pairs") in.fail("expected 'pairs'");
        std::size_t count = std::stoul(f[1]);
        for (std::size_t k = 0; k < count; ++k) {
            if (!in.next()) throw IntegrityError("model file: truncated pair shape");
            std::vector<std::string> row = split_fields(in.line);
            if (row.size() < 5 || row[0] != "pair") in.fail("bad pair row");
            PairShape p;
            p.feature_i = std::stoul(row[1]);
            p.feature_j = std::stoul(row[2]);
            p.bins_i = std::stoul(row[3]);
            p.bins_j = std::stoul(row[4]);
            if (row.size() != 5 + p.bins_i * p.bins_j) in.fail("pair grid size mismatch");
            p.contribution.resize(p.bins_i * p.bins_j);
            for (std::size_t c = 0; c < p.contribution.size(); ++c)
                p.contribution[c] = parse_double(row[5 + c]);
            file.model.pairs.push_back(std::move(p));
        }
    }

    if (!in.next()) throw IntegrityError("model file: truncated before subnetworks");
    {
        std::vector<std::string> f = split_fields(in.line);
        if (f.size() != 2 || f[0] != "subnetworks") in.fail("expected 'subnetworks'");
        std::size_t count = std::stoul(f[1]);
        if (count > 0) {
            if (!in.next()) throw IntegrityError("model file: truncated native bias");
            std::vector<std::string> nb = split_fields(in.line);
            if (nb.size() != 2 || nb[0] != "native_bias") in.fail("expected 'native_bias'");
            file.native_bias = parse_double(nb[1]);
            for (std::size_t k = 0; k < count; ++k) {
                if (!in.next()) throw IntegrityError("model file: truncated subnetwork");
                std::vector<std::string> row = split_fields(in.line);
                if (row.size() < 5 || row[0] != "subnet") in.fail("bad subnet row");
                Subnetwork net;
                net.kind =
                    row[1] == "main" ? Subnetwork::Kind::Main : Subnetwork::Kind::Pair;
                net.feature_i = std::stoul(row[2]);
                net.feature_j = std::stoul(row[3]);
                std::size_t layer_count = std::stoul(row[4]);
                if (row.size() < 5 + layer_count + 1) in.fail("subnet layer list truncated");
                for (std::size_t l = 0; l < layer_count; ++l)
                    net.layers.push_back(std::stoul(row[5 + l]));
                std::size_t param_count = std::stoul(row[5 + layer_count]);
                if (row.size() != 6 + layer_count + param_count)
                    in.fail("subnet parameter count mismatch");
                net.params.resize(param_count);
                for (std::size_t p = 0; p < param_count; ++p)
                    net.params[p] = parse_double(row[6 + layer_count + p]);
                file.subnetworks.push_back(std::move(net));
            }
        }
    }

    try {
        file.model.validate();
    } catch (const ValidationError& e) {
        throw IntegrityError(std::string("model file: invalid model structure: ") + e.what());
    }
    return file;
}

void save_model(const ModelFile& file, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    out << serialize_model(file);
    if (!out) throw DataError("failed writing model file: " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

} // namespace gamsum
