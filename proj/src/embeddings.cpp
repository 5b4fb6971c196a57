#include "tagsem/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "tagsem/corpus.hpp"
#include "tagsem/errors.hpp"
#include "tagsem/io.hpp"

namespace tagsem {

EmbeddingTable::EmbeddingTable(std::string name, Eigen::Index dim)
    : name_(std::move(name)), dim_(dim) {
  if (dim_ <= 0) throw std::invalid_argument("EmbeddingTable: dim must be positive");
}

void EmbeddingTable::insert(const std::string& token, Eigen::VectorXd vec) {
  if (vec.size() != dim_)
    throw std::invalid_argument("EmbeddingTable " + name_ + ": vector for \"" + token +
                                "\" has length " + std::to_string(vec.size()) + ", expected " +
                                std::to_string(dim_));
  if (vec.isZero(0.0))
    throw std::invalid_argument("EmbeddingTable " + name_ + ": zero vector for token \"" +
                                token + "\"");
  if (!entries_.emplace(token, std::move(vec)).second)
    throw std::invalid_argument("EmbeddingTable " + name_ + ": duplicate token \"" + token +
                                "\"");
}

const Eigen::VectorXd* EmbeddingTable::find(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> EmbeddingTable::tokens() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [token, vec] : entries_) out.push_back(token);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Eigen::VectorXd> EmbeddingTable::phrase_vector(const std::string& phrase) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
  int covered = 0;
  for (const std::string& token : tokenize(phrase)) {
    if (const Eigen::VectorXd* v = find(token)) {
      sum += *v;
      ++covered;
    }
  }
  if (covered == 0) return std::nullopt;
  return sum / covered;
}

EmbeddingTable load_table(const std::filesystem::path& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file: " + path.string());

  std::string line;
  int line_no = 0;
  std::optional<EmbeddingTable> table;
  bool first_line = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> values;
    double v;
    while (row >> v) values.push_back(v);
    if (!row.eof()) throw ParseError(where + ": non-numeric vector component");

    // Optional "vocab_size dim" header: first line, numeric token, one value.
    if (first_line && values.size() == 1) {
      int declared_dim = 0;
      auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), declared_dim);
      if (ec == std::errc() && p == token.data() + token.size()) {
        const int dim = static_cast<int>(values[0]);
        if (dim <= 0) throw ParseError(where + ": header dim must be positive");
        table.emplace(name, dim);
        first_line = false;
        continue;
      }
    }
    first_line = false;

    if (values.empty()) throw ParseError(where + ": no vector components");
    if (!table) table.emplace(name, static_cast<Eigen::Index>(values.size()));
    if (static_cast<Eigen::Index>(values.size()) != table->dim())
      throw ParseError(where + ": vector length " + std::to_string(values.size()) +
                       " does not match table dim " + std::to_string(table->dim()));

    Eigen::VectorXd vec = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                            static_cast<Eigen::Index>(values.size()));
    if (vec.isZero(0.0)) throw ParseError(where + ": zero vector for token \"" + token + "\"");
    try {
      table->insert(token, std::move(vec));
    } catch (const std::invalid_argument& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (!table) throw ParseError(path.string() + ": empty embedding file");
  return std::move(*table);
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  out << table.size() << ' ' << table.dim() << '\n';
  for (const std::string& token : table.tokens()) {
    const Eigen::VectorXd* v = table.find(token);
    out << token;
    for (Eigen::Index i = 0; i < v->size(); ++i) out << ' ' << (*v)(i);
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

EmbeddingEnsemble::EmbeddingEnsemble(std::vector<std::shared_ptr<const EmbeddingTable>> tables)
    : tables_(std::move(tables)) {
  if (tables_.empty()) throw std::invalid_argument("EmbeddingEnsemble: no tables");
  std::set<std::string> names;
  for (const auto& t : tables_) {
    if (!t) throw std::invalid_argument("EmbeddingEnsemble: null table");
    if (!names.insert(t->name()).second)
      throw std::invalid_argument("EmbeddingEnsemble: duplicate table name \"" + t->name() +
                                  "\"");
  }
}

std::optional<double> EmbeddingEnsemble::averaged_similarity(const std::string& x,
                                                             const std::string& y) const {
  double sum = 0.0;
  int covering = 0;
  for (const auto& t : tables_) {
    const auto vx = t->phrase_vector(x);
    if (!vx) continue;
    const auto vy = t->phrase_vector(y);
    if (!vy) continue;
    sum += cosine(*vx, *vy);
    ++covering;
  }
  if (covering == 0) return std::nullopt;
  return sum / covering;
}

EmbeddingEnsemble EmbeddingEnsemble::restricted(std::size_t table_index) const {
  return EmbeddingEnsemble({tables_.at(table_index)});
}

}  // namespace tagsem
