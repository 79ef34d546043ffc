#include "quadrat/world_io.hpp"

#include <fstream>
#include <sstream>

#include "quadrat/error.hpp"
#include "quadrat/metric.hpp"

namespace quadrat {

namespace fs = std::filesystem;

SynthConfig synth_config_from(const KeyValueConfig& kv) {
  SynthConfig cfg;
  auto get_int = [&](const char* key, int& field) {
    if (auto v = kv.get(key)) field = static_cast<int>(parse_int(*v, key));
  };
  get_int("n_species", cfg.n_species);
  get_int("n_genera", cfg.n_genera);
  get_int("n_families", cfg.n_families);
  get_int("grid_cells", cfg.grid_cells);
  get_int("feature_dim", cfg.feature_dim);
  if (auto v = kv.get("richness")) {
    cfg.richness_min = cfg.richness_max = static_cast<int>(parse_int(*v, "richness"));
  }
  get_int("richness_min", cfg.richness_min);
  get_int("richness_max", cfg.richness_max);
  get_int("n_quadrats", cfg.n_quadrats);
  get_int("quadrats_per_transect", cfg.quadrats_per_transect);
  get_int("patch_align", cfg.patch_align);
  if (auto v = kv.get("noise_sigma")) cfg.noise_sigma = parse_double(*v, "noise_sigma");
  if (auto v = kv.get("logit_scale")) cfg.logit_scale = parse_double(*v, "logit_scale");
  if (auto v = kv.get("prototypes")) {
    if (*v == "orthogonal") {
      cfg.prototypes = PrototypeKind::orthogonal;
    } else if (*v == "sphere") {
      cfg.prototypes = PrototypeKind::sphere;
    } else {
      throw Error(ErrorKind::invalid_config, "prototypes must be orthogonal or sphere");
    }
  }
  if (auto v = kv.get("seed")) cfg.seed = static_cast<std::uint64_t>(parse_int(*v, "seed"));
  if (auto unused = kv.unused_keys(); !unused.empty()) {
    throw Error(ErrorKind::invalid_config, "unknown config key '" + unused.front() + "'");
  }
  cfg.validate();
  return cfg;
}

namespace {

constexpr int kExact = 17;

void append_joined(std::string& out, const double* data, std::size_t n, char sep) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += sep;
    out += format_double(data[i], kExact);
  }
}

void append_matrix(std::string& out, const char* tag, const Eigen::MatrixXd& m) {
  out += tag;
  // Row-major order.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out += ' ';
      out += format_double(m(r, c), kExact);
    }
  }
  out += '\n';
}

}  // namespace

std::string format_heads(const HeadRegistry& heads) {
  std::string out;
  for (const auto& [id, h] : heads.all()) {
    out += "head " + id + " " + std::string(to_string(h.level)) + " " + std::to_string(h.layers()) + " " +
           std::to_string(h.w1.rows()) + " " + std::to_string(h.w1.cols());
    if (h.w2) out += " " + std::to_string(h.w2->rows()) + " " + std::to_string(h.w2->cols());
    out += '\n';
    append_matrix(out, "w1", h.w1);
    append_matrix(out, "b1", h.b1.transpose());
    if (h.w2) {
      append_matrix(out, "w2", *h.w2);
      append_matrix(out, "b2", h.b2->transpose());
    }
  }
  return out;
}

namespace {

Eigen::MatrixXd read_matrix(std::istream& in, const char* tag, long rows, long cols) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::parse, std::string("heads: missing ") + tag);
  std::istringstream ss(line);
  std::string got;
  ss >> got;
  if (got != tag) throw Error(ErrorKind::parse, "heads: expected " + std::string(tag) + ", got " + got);
  Eigen::MatrixXd m(rows, cols);
  std::string token;
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (!(ss >> token)) throw Error(ErrorKind::parse, std::string("heads: short ") + tag);
      m(r, c) = parse_double(token, std::string("heads ") + tag);
    }
  }
  if (ss >> token) throw Error(ErrorKind::parse, std::string("heads: trailing values in ") + tag);
  return m;
}

Level parse_level(const std::string& s) {
  if (s == "species") return Level::species;
  if (s == "genus") return Level::genus;
  if (s == "family") return Level::family;
  throw Error(ErrorKind::parse, "heads: unknown level " + s);
}

}  // namespace

HeadRegistry parse_heads(std::istream& in) {
  HeadRegistry reg;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag;
    std::string level;
    Head h;
    int layers = 0;
    long r1 = 0;
    long c1 = 0;
    ss >> tag >> h.id >> level >> layers >> r1 >> c1;
    if (tag != "head" || !ss || (layers != 1 && layers != 2) || r1 < 1 || c1 < 1) {
      throw Error(ErrorKind::parse, "heads: bad header line '" + line + "'");
    }
    h.level = parse_level(level);
    h.w1 = read_matrix(in, "w1", r1, c1);
    h.b1 = read_matrix(in, "b1", 1, r1).transpose();
    if (layers == 2) {
      long r2 = 0;
      long c2 = 0;
      if (!(ss >> r2 >> c2) || c2 != r1 || r2 < 1) {
        throw Error(ErrorKind::parse, "heads: bad second-layer shape in '" + line + "'");
      }
      h.w2 = read_matrix(in, "w2", r2, c2);
      h.b2 = Eigen::VectorXd(read_matrix(in, "b2", 1, r2).transpose());
    }
    reg.add(std::move(h));
  }
  return reg;
}

HeadRegistry load_heads(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_heads(in);
}

void write_world(const fs::path& dir, const SynthWorld& world) {
  std::error_code ec;
  fs::create_directories(dir / "quadrats", ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + (dir / "quadrats").string() + ": " + ec.message());

  std::ostringstream tax;
  write_taxonomy(tax, world.taxonomy);
  write_file_atomic(dir / "taxonomy.csv", tax.str());

  GroundTruthTable truth;
  std::string index = "quadrat_id,transect_id,grid_cells,feature_dim\n";
  for (const auto& q : world.quadrats) {
    LabelSet species;
    for (auto s : q.truth) species.insert(world.taxonomy.external_species(s));
    truth[q.quadrat_id] = {q.transect_id, std::move(species)};
    index += q.quadrat_id + "," + q.transect_id + "," + std::to_string(q.grid_cells) + "," +
             std::to_string(q.feature_dim) + "\n";

    std::string features = "y,x,values\n";
    for (int y = 0; y < q.grid_cells; ++y) {
      for (int x = 0; x < q.grid_cells; ++x) {
        features += std::to_string(y) + "," + std::to_string(x) + ",";
        const auto cell = q.cell(x, y);
        append_joined(features, cell.data(), cell.size(), ';');
        features += '\n';
      }
    }
    write_file_atomic(dir / "quadrats" / (q.quadrat_id + ".csv"), features);
  }
  write_file_atomic(dir / "quadrats.csv", index);
  write_file_atomic(dir / "groundtruth.csv", format_groundtruth(truth));
  write_file_atomic(dir / "heads.txt", format_heads(world.heads));
}

std::vector<QuadratMeta> load_quadrat_index(const fs::path& dir) {
  std::ifstream in(dir / "quadrats.csv", std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + (dir / "quadrats.csv").string());
  CsvReader reader(in, "quadrat_id,transect_id,grid_cells,feature_dim");
  std::vector<QuadratMeta> out;
  while (auto f = reader.next()) {
    if (f->size() != 4) throw Error(ErrorKind::parse, reader.where() + ": expected 4 fields");
    out.push_back({(*f)[0], (*f)[1], static_cast<int>(parse_int((*f)[2], reader.where())),
                   static_cast<int>(parse_int((*f)[3], reader.where()))});
    if (out.back().grid_cells < 1 || out.back().feature_dim < 1) {
      throw Error(ErrorKind::parse, reader.where() + ": non-positive dimensions");
    }
  }
  return out;
}

Quadrat load_quadrat_features(const fs::path& dir, const QuadratMeta& meta) {
  const auto path = dir / "quadrats" / (meta.quadrat_id + ".csv");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  Quadrat q;
  q.quadrat_id = meta.quadrat_id;
  q.transect_id = meta.transect_id;
  q.grid_cells = meta.grid_cells;
  q.feature_dim = meta.feature_dim;
  const auto n = static_cast<std::size_t>(meta.grid_cells);
  const auto d = static_cast<std::size_t>(meta.feature_dim);
  q.cells.assign(n * n * d, 0.0);
  std::vector<bool> seen(n * n, false);

  CsvReader reader(in, "y,x,values");
  while (auto f = reader.next()) {
    const auto w = path.string() + " " + reader.where();
    if (f->size() != 3) throw Error(ErrorKind::parse, w + ": expected 3 fields");
    const auto y = parse_int((*f)[0], w);
    const auto x = parse_int((*f)[1], w);
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= n || static_cast<std::size_t>(y) >= n) {
      throw Error(ErrorKind::parse, w + ": cell outside grid");
    }
    auto values = parse_double_list((*f)[2], ';', w);
    if (values.size() != d) throw Error(ErrorKind::parse, w + ": wrong feature count");
    const auto cell = static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x);
    seen[cell] = true;
    std::copy(values.begin(), values.end(), q.cells.begin() + static_cast<std::ptrdiff_t>(cell * d));
  }
  for (bool s : seen) {
    if (!s) throw Error(ErrorKind::parse, path.string() + ": missing cells");
  }
  return q;
}

}  // namespace quadrat
