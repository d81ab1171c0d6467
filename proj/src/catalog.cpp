#include "dpsql/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace dpsql {

const ColumnMeta* TableMeta::find_column(const std::string& n) const {
    for (const auto& c : columns) {
        if (c.name == n) return &c;
    }
    return nullptr;
}

int TableMeta::column_index(const std::string& n) const {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == n) return static_cast<int>(i);
    }
    return -1;
}

const TableMeta* Catalog::find_table(const std::string& name) const {
    auto it = tables.find(name);
    return it == tables.end() ? nullptr : &it->second;
}

const TableMeta& Catalog::table(const std::string& name) const {
    const TableMeta* t = find_table(name);
    if (!t) throw BindError(BindErrorKind::UnknownTable, "unknown table: " + name);
    return *t;
}

const PidPath* Catalog::pid_path(const std::string& table) const {
    auto it = pid_paths_.find(table);
    return it == pid_paths_.end() ? nullptr : &it->second;
}

// ---- tokenizer for the catalog text format ----
namespace {

struct Tok {
    enum Kind { Ident, Number, String, Punct, End } kind = End;
    std::string text;
    size_t pos = 0;
};

class Scanner {
public:
    explicit Scanner(const std::string& src) : src_(src) { advance(); }

    const Tok& peek() const { return tok_; }

    Tok take() {
        Tok t = tok_;
        advance();
        return t;
    }

    Tok expect(Tok::Kind k, const std::string& what) {
        if (tok_.kind != k) fail("expected " + what);
        return take();
    }

    void expect_punct(char c) {
        if (tok_.kind != Tok::Punct || tok_.text[0] != c) fail(std::string("expected '") + c + "'");
        advance();
    }

    bool accept_punct(char c) {
        if (tok_.kind == Tok::Punct && tok_.text[0] == c) {
            advance();
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw CatalogError(CatalogErrorKind::Malformed,
                           "catalog: " + msg + " near '" + tok_.text + "' (offset " +
                               std::to_string(tok_.pos) + ")");
    }

private:
    void advance() {
        while (i_ < src_.size()) {
            char c = src_[i_];
            if (c == '#') {
                while (i_ < src_.size() && src_[i_] != '\n') ++i_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++i_;
            } else {
                break;
            }
        }
        tok_.pos = i_;
        if (i_ >= src_.size()) {
            tok_ = {Tok::End, "<eof>", i_};
            return;
        }
        char c = src_[i_];
        if (c == '\'' || c == '"') {
            char q = c;
            size_t j = i_ + 1;
            std::string s;
            while (j < src_.size() && src_[j] != q) s += src_[j++];
            if (j >= src_.size())
                throw CatalogError(CatalogErrorKind::Malformed, "catalog: unterminated string");
            tok_ = {Tok::String, s, i_};
            i_ = j + 1;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
            size_t j = i_;
            if (c == '-' || c == '+') ++j;
            size_t start = i_;
            while (j < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[j])) || src_[j] == '.' ||
                    src_[j] == 'e' || src_[j] == 'E' ||
                    ((src_[j] == '-' || src_[j] == '+') && (src_[j - 1] == 'e' || src_[j - 1] == 'E')))) {
                ++j;
            }
            tok_ = {Tok::Number, src_.substr(start, j - start), start};
            i_ = j;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i_;
            while (j < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_')) {
                ++j;
            }
            tok_ = {Tok::Ident, src_.substr(i_, j - i_), i_};
            i_ = j;
            return;
        }
        tok_ = {Tok::Punct, std::string(1, c), i_};
        ++i_;
    }

    const std::string& src_;
    size_t i_ = 0;
    Tok tok_;
};

Value scalar_for(Scanner& sc, Dtype t) {
    Tok tok = sc.take();
    try {
        if (tok.kind == Tok::Number) {
            if (t == Dtype::Int) return parse_value(Dtype::Int, tok.text);
            if (t == Dtype::Real) return parse_value(Dtype::Real, tok.text);
            throw Error("numeric literal for non-numeric column");
        }
        if (tok.kind == Tok::String) {
            if (t == Dtype::Text) return Value::from_text(tok.text);
            if (t == Dtype::Date) return Value::from_date(parse_date(tok.text));
            throw Error("string literal for " + dtype_name(t) + " column");
        }
    } catch (const CatalogError&) {
        throw;
    } catch (const Error& e) {
        throw CatalogError(CatalogErrorKind::Malformed, std::string("catalog: ") + e.what());
    }
    throw CatalogError(CatalogErrorKind::Malformed,
                       "catalog: expected literal, got '" + tok.text + "'");
}

ColumnMeta parse_column_tuple(Scanner& sc) {
    ColumnMeta col;
    sc.expect_punct('(');
    col.name = sc.expect(Tok::Ident, "column name").text;
    sc.expect_punct(',');
    col.dtype = dtype_from_name(sc.expect(Tok::Ident, "column type").text);
    while (sc.accept_punct(',')) {
        if (sc.peek().kind == Tok::Ident && sc.peek().text == "domain") {
            sc.take();
            sc.expect_punct('=');
            sc.expect_punct('[');
            while (!sc.accept_punct(']')) {
                col.domain.push_back(scalar_for(sc, col.dtype));
                if (!sc.accept_punct(',')) {
                    sc.expect_punct(']');
                    break;
                }
            }
        } else if (sc.peek().kind == Tok::Punct && sc.peek().text == ")") {
            break;  // trailing comma
        } else {
            if (col.dtype == Dtype::Text)
                throw CatalogError(CatalogErrorKind::Malformed,
                                   "catalog: range not allowed on text column " + col.name);
            Value lo = scalar_for(sc, col.dtype);
            sc.expect_punct(',');
            Value hi = scalar_for(sc, col.dtype);
            col.range = {lo, hi};
        }
    }
    sc.expect_punct(')');
    return col;
}

} // namespace

Catalog parse_catalog(const std::string& text) {
    Scanner sc(text);
    Catalog cat;
    std::vector<std::string> table_order;

    // top-level keys
    while (sc.peek().kind == Tok::Ident) {
        std::string key = sc.take().text;
        sc.expect_punct('=');
        if (key == "privacy_unit") {
            std::string v = sc.expect(Tok::String, "privacy unit string").text;
            if (v == "tuple") cat.privacy_unit = PrivacyUnit::Tuple;
            else if (v == "user") cat.privacy_unit = PrivacyUnit::User;
            else throw CatalogError(CatalogErrorKind::Malformed, "catalog: privacy_unit must be 'tuple' or 'user'");
        } else {
            throw CatalogError(CatalogErrorKind::Malformed, "catalog: unknown top-level key " + key);
        }
    }

    while (sc.peek().kind != Tok::End) {
        sc.expect_punct('[');
        std::string kw = sc.expect(Tok::Ident, "'table'").text;
        if (kw != "table") throw CatalogError(CatalogErrorKind::Malformed, "catalog: expected [table.<name>]");
        sc.expect_punct('.');
        std::string name = sc.expect(Tok::Ident, "table name").text;
        sc.expect_punct(']');
        if (cat.tables.count(name))
            throw CatalogError(CatalogErrorKind::Malformed, "catalog: duplicate table " + name);

        TableMeta tm;
        tm.name = name;
        while (sc.peek().kind == Tok::Ident) {
            std::string key = sc.take().text;
            sc.expect_punct('=');
            if (key == "columns") {
                sc.expect_punct('[');
                while (!sc.accept_punct(']')) {
                    tm.columns.push_back(parse_column_tuple(sc));
                    if (!sc.accept_punct(',')) {
                        sc.expect_punct(']');
                        break;
                    }
                }
            } else if (key == "primary_key") {
                sc.expect_punct('[');
                while (!sc.accept_punct(']')) {
                    tm.primary_key.push_back(sc.expect(Tok::Ident, "column name").text);
                    if (!sc.accept_punct(',')) {
                        sc.expect_punct(']');
                        break;
                    }
                }
            } else if (key == "foreign_keys") {
                sc.expect_punct('[');
                while (!sc.accept_punct(']')) {
                    ForeignKey fk;
                    sc.expect_punct('(');
                    fk.local_column = sc.expect(Tok::Ident, "local column").text;
                    sc.expect_punct(',');
                    fk.remote_table = sc.expect(Tok::Ident, "remote table").text;
                    sc.expect_punct(',');
                    fk.remote_column = sc.expect(Tok::Ident, "remote column").text;
                    sc.expect_punct(')');
                    tm.foreign_keys.push_back(fk);
                    if (!sc.accept_punct(',')) {
                        sc.expect_punct(']');
                        break;
                    }
                }
            } else if (key == "pid_column") {
                tm.pid_column = sc.expect(Tok::Ident, "pid column").text;
            } else if (key == "max_user_contribution") {
                Tok t = sc.expect(Tok::Number, "positive integer");
                tm.max_user_contribution = std::stoll(t.text);
            } else {
                throw CatalogError(CatalogErrorKind::Malformed, "catalog: unknown key " + key + " in table " + name);
            }
        }
        cat.tables.emplace(name, std::move(tm));
        table_order.push_back(name);
    }

    cat.validate();
    return cat;
}

Catalog load_catalog(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CatalogError(CatalogErrorKind::Malformed, "cannot open catalog file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_catalog(ss.str());
}

void Catalog::validate() {
    pid_paths_.clear();
    for (auto& [name, tm] : tables) {
        std::set<std::string> seen;
        for (const auto& c : tm.columns) {
            if (!seen.insert(c.name).second)
                throw CatalogError(CatalogErrorKind::Malformed,
                                   "catalog: duplicate column " + c.name + " in " + name);
            if (c.range) {
                if (!(c.range->first < c.range->second) && !(c.range->first == c.range->second))
                    throw CatalogError(CatalogErrorKind::InvalidRange,
                                       "catalog: range lo > hi on " + name + "." + c.name);
            }
        }
        for (const auto& pk : tm.primary_key) {
            if (!tm.find_column(pk))
                throw CatalogError(CatalogErrorKind::InvalidReference,
                                   "catalog: primary key column " + pk + " not in " + name);
        }
        for (const auto& fk : tm.foreign_keys) {
            if (!tm.find_column(fk.local_column))
                throw CatalogError(CatalogErrorKind::InvalidReference,
                                   "catalog: foreign key column " + fk.local_column + " not in " + name);
            const TableMeta* remote = find_table(fk.remote_table);
            if (!remote)
                throw CatalogError(CatalogErrorKind::InvalidReference,
                                   "catalog: foreign key of " + name + " references missing table " +
                                       fk.remote_table);
            if (!remote->find_column(fk.remote_column))
                throw CatalogError(CatalogErrorKind::InvalidReference,
                                   "catalog: foreign key of " + name + " references missing column " +
                                       fk.remote_table + "." + fk.remote_column);
        }
        if (tm.pid_column && !tm.find_column(*tm.pid_column))
            throw CatalogError(CatalogErrorKind::InvalidReference,
                               "catalog: pid column " + *tm.pid_column + " not in " + name);
        if (tm.max_user_contribution && *tm.max_user_contribution < 1)
            throw CatalogError(CatalogErrorKind::Malformed,
                               "catalog: max_user_contribution < 1 on " + name);
    }

    // Resolve PID paths. A direct pid column wins; otherwise every
    // distinct foreign-key path ending at a pid-tagged table counts,
    // and more than one such path is ambiguous.
    for (const auto& [name, tm] : tables) {
        if (tm.pid_column) {
            pid_paths_[name] = PidPath{{}, name, *tm.pid_column};
            continue;
        }
        std::vector<PidPath> found;
        std::vector<PidStep> trail;
        std::set<std::string> on_path{name};

        std::function<void(const TableMeta&)> dfs = [&](const TableMeta& t) {
            for (const auto& fk : t.foreign_keys) {
                const TableMeta& remote = tables.at(fk.remote_table);
                if (on_path.count(remote.name)) continue;
                trail.push_back({fk.local_column, fk.remote_table, fk.remote_column});
                if (remote.pid_column) {
                    found.push_back(PidPath{trail, remote.name, *remote.pid_column});
                } else {
                    on_path.insert(remote.name);
                    dfs(remote);
                    on_path.erase(remote.name);
                }
                trail.pop_back();
            }
        };
        dfs(tm);

        if (found.size() > 1)
            throw CatalogError(CatalogErrorKind::AmbiguousPid,
                               "catalog: table " + name + " reaches more than one PID ancestor");
        if (found.size() == 1) pid_paths_[name] = found[0];
    }

    if (privacy_unit == PrivacyUnit::User && pid_paths_.empty() && !tables.empty())
        throw CatalogError(CatalogErrorKind::MissingPid,
                           "catalog: privacy_unit is user but no table declares a pid column");
}

std::string serialize_catalog(const Catalog& cat) {
    std::ostringstream out;
    out << "privacy_unit = \"" << (cat.privacy_unit == PrivacyUnit::User ? "user" : "tuple")
        << "\"\n";
    for (const auto& [name, tm] : cat.tables) {
        out << "\n[table." << name << "]\n";
        out << "columns = [\n";
        for (const auto& c : tm.columns) {
            out << "  (" << c.name << ", " << dtype_name(c.dtype);
            if (c.range) out << ", " << c.range->first.to_sql() << ", " << c.range->second.to_sql();
            if (!c.domain.empty()) {
                out << ", domain=[";
                for (size_t i = 0; i < c.domain.size(); ++i) {
                    if (i) out << ", ";
                    out << c.domain[i].to_sql();
                }
                out << "]";
            }
            out << "),\n";
        }
        out << "]\n";
        if (!tm.primary_key.empty()) {
            out << "primary_key = [";
            for (size_t i = 0; i < tm.primary_key.size(); ++i) {
                if (i) out << ", ";
                out << tm.primary_key[i];
            }
            out << "]\n";
        }
        if (!tm.foreign_keys.empty()) {
            out << "foreign_keys = [";
            for (size_t i = 0; i < tm.foreign_keys.size(); ++i) {
                if (i) out << ", ";
                const auto& fk = tm.foreign_keys[i];
                out << "(" << fk.local_column << ", " << fk.remote_table << ", " << fk.remote_column
                    << ")";
            }
            out << "]\n";
        }
        if (tm.pid_column) out << "pid_column = " << *tm.pid_column << "\n";
        if (tm.max_user_contribution)
            out << "max_user_contribution = " << *tm.max_user_contribution << "\n";
    }
    return out.str();
}

} // namespace dpsql
