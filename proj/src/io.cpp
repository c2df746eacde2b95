#include "bildsim/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "bildsim/errors.hpp"

namespace bildsim::io {
namespace {

static_assert(std::endian::native == std::endian::little, "trajectory files assume little-endian");

constexpr std::string_view kMagic = "BILDSIM-TRAJ\n";

std::string where(std::string_view context, std::string_view key) {
  return context.empty() ? std::string(key) : std::string(context) + "." + std::string(key);
}

const Json& require(const Json& object, const std::string& key, std::string_view context) {
  if (!object.is_object() || !object.contains(key)) {
    throw ValidationError("missing required field '" + where(context, key) + "'",
                          where(context, key));
  }
  return object.at(key);
}

Eigen::MatrixXd real_rows(const Json& j, std::string_view field) {
  if (!j.is_array() || j.empty()) throw ValidationError("matrix must be a non-empty array of rows", std::string(field));
  const auto rows = static_cast<long>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (long r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<long>(row.size()) != rows) {
      throw ValidationError("matrix must be square", std::string(field));
    }
    for (long c = 0; c < rows; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw ValidationError("matrix entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number",
                              std::string(field));
      }
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

template <typename T>
void put(std::string& out, const T* data, std::size_t count) {
  out.append(reinterpret_cast<const char*>(data), count * sizeof(T));
}

}  // namespace

hilbert::Matrix matrix_from_json(const Json& j, std::string_view field, long dim_hint) {
  if (j.is_string()) {
    if (j.get<std::string>() != "identity") {
      throw ValidationError("unknown matrix shorthand '" + j.get<std::string>() + "'", std::string(field));
    }
    if (dim_hint < 1) throw ValidationError("'identity' needs a dimension", std::string(field));
    return hilbert::Matrix::Identity(dim_hint, dim_hint);
  }
  hilbert::Matrix m;
  if (j.is_array()) {
    m = real_rows(j, field).cast<std::complex<double>>();
  } else if (j.is_object()) {
    reject_unknown_keys(j, {"dim", "re", "im"}, field);
    const Eigen::MatrixXd re = real_rows(require(j, "re", field), std::string(field) + ".re");
    Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
    if (j.contains("im")) {
      im = real_rows(j.at("im"), std::string(field) + ".im");
      if (im.rows() != re.rows()) throw DimensionMismatch("re and im parts differ in size", std::string(field));
    }
    if (j.contains("dim") && get_count(j, "dim", field) != static_cast<std::uint64_t>(re.rows())) {
      throw DimensionMismatch("declared dim does not match the matrix", std::string(field));
    }
    m.resize(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
  } else {
    throw ValidationError("matrix must be an array, an object or \"identity\"", std::string(field));
  }
  if (dim_hint > 0 && m.rows() != dim_hint) {
    throw DimensionMismatch("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                ", expected dim " + std::to_string(dim_hint),
                            std::string(field));
  }
  return m;
}

Json matrix_to_json(const hilbert::Matrix& m) {
  Json re = Json::array(), im = Json::array();
  for (long r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ii = Json::array();
    for (long c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return Json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

void reject_unknown_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
  if (!object.is_object()) {
    throw ValidationError(std::string(context.empty() ? "config" : context) + " must be a JSON object",
                          std::string(context));
  }
  for (const auto& item : object.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) throw ValidationError("unknown key '" + where(context, item.key()) + "'", where(context, item.key()));
  }
}

double get_number(const Json& object, const std::string& key, std::string_view context) {
  const auto& v = require(object, key, context);
  if (!v.is_number()) throw ValidationError("field '" + where(context, key) + "' must be a number", where(context, key));
  return v.get<double>();
}

double get_number(const Json& object, const std::string& key, std::string_view context, double fallback) {
  return object.contains(key) ? get_number(object, key, context) : fallback;
}

std::uint64_t get_count(const Json& object, const std::string& key, std::string_view context) {
  const auto& v = require(object, key, context);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ValidationError("field '" + where(context, key) + "' must be non-negative", where(context, key));
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ValidationError("field '" + where(context, key) + "' must be a non-negative integer", where(context, key));
}

std::uint64_t get_count(const Json& object, const std::string& key, std::string_view context,
                        std::uint64_t fallback) {
  return object.contains(key) ? get_count(object, key, context) : fallback;
}

std::vector<double> get_numbers(const Json& object, const std::string& key, std::string_view context) {
  const auto& v = require(object, key, context);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ValidationError("field '" + where(context, key) + "' must be an array of numbers", where(context, key));
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError("field '" + where(context, key) + "' must be an array of numbers", where(context, key));
    out.push_back(x.get<double>());
  }
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return {};
  return fmt::format("{}", x);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::logic_error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string(), "config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string encode_trajectories(const brownian::TrajectoryEnsemble& e) {
  const Json header{{"schema_version", kTrajectorySchemaVersion},
                    {"config_hash", hex64(e.config_hash)},
                    {"seed", e.seed},
                    {"n_trajectories", e.n_trajectories},
                    {"n_particles", e.n_particles},
                    {"n_snapshots", e.n_snapshots()},
                    {"dt", e.dt},
                    {"record_stride", e.record_stride},
                    {"layout", "trajectory,snapshot,particle"},
                    {"columns", e.has_momenta() ? Json{"time", "x", "p"} : Json{"time", "x"}},
                    {"dtype", "float64-le"}};
  const std::string text = header.dump();
  std::string out(kMagic);
  const std::uint64_t length = text.size();
  put(out, &length, 1);
  out += text;
  put(out, e.times.data(), e.times.size());
  put(out, e.positions.data(), e.positions.size());
  put(out, e.momenta.data(), e.momenta.size());
  return out;
}

brownian::TrajectoryEnsemble decode_trajectories(std::string_view bytes) {
  auto fail = [](const std::string& why) -> ValidationError {
    return ValidationError("malformed trajectory file: " + why, "trajectories");
  };
  if (bytes.substr(0, kMagic.size()) != kMagic) throw fail("bad magic");
  std::size_t pos = kMagic.size();
  std::uint64_t length = 0;
  if (bytes.size() < pos + sizeof length) throw fail("truncated header");
  std::memcpy(&length, bytes.data() + pos, sizeof length);
  pos += sizeof length;
  if (bytes.size() < pos + length) throw fail("truncated header");
  Json header;
  try {
    header = Json::parse(bytes.substr(pos, length));
  } catch (const Json::exception& ex) {
    throw fail(ex.what());
  }
  pos += length;
  if (header.value("schema_version", 0) != kTrajectorySchemaVersion) throw fail("unsupported schema version");

  brownian::TrajectoryEnsemble e;
  e.n_trajectories = header.at("n_trajectories").get<std::size_t>();
  e.n_particles = header.at("n_particles").get<std::size_t>();
  const auto snaps = header.at("n_snapshots").get<std::size_t>();
  e.dt = header.at("dt").get<double>();
  e.record_stride = header.at("record_stride").get<std::size_t>();
  e.seed = header.at("seed").get<std::uint64_t>();
  e.config_hash = std::stoull(header.at("config_hash").get<std::string>(), nullptr, 16);
  const bool momenta = header.at("columns").size() == 3;
  const std::size_t cells = e.n_trajectories * snaps * e.n_particles;
  const std::size_t need = (snaps + cells * (momenta ? 2 : 1)) * sizeof(double);
  if (bytes.size() - pos != need) throw fail("payload size does not match header");
  auto take = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    std::memcpy(v.data(), bytes.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
  };
  take(e.times, snaps);
  take(e.positions, cells);
  if (momenta) take(e.momenta, cells);
  return e;
}

std::string trajectories_csv(const brownian::TrajectoryEnsemble& e) {
  std::vector<std::string> header{"trajectory", "snapshot", "time", "particle", "x"};
  if (e.has_momenta()) header.emplace_back("p");
  CsvTable table(std::move(header));
  for (std::size_t t = 0; t < e.n_trajectories; ++t) {
    for (std::size_t s = 0; s < e.n_snapshots(); ++s) {
      for (std::size_t i = 0; i < e.n_particles; ++i) {
        std::vector<std::string> row{std::to_string(t), std::to_string(s), format_double(e.times[s]),
                                     std::to_string(i), format_double(e.x(t, s, i))};
        if (e.has_momenta()) row.push_back(format_double(e.p(t, s, i)));
        table.add_row(std::move(row));
      }
    }
  }
  return table.str();
}

}  // namespace bildsim::io
