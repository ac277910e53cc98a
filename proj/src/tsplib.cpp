#include "zoneseq/tsplib.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fcntl.h>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "zoneseq/io.hpp"

namespace zoneseq::tsp {

namespace {

std::atomic<std::uint64_t> job_counter{0};

// Splits on whitespace and ':' so both "KEY: VALUE" and "KEY : VALUE" parse.
std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == ':') {
      if (!cur.empty()) {
        out.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) {
    out.push_back(std::move(cur));
  }
  return out;
}

long long to_int(const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) {
      throw ValidationError("TSPLIB: bad integer '" + s + "'");
    }
    return v;
  } catch (const std::logic_error&) {
    throw ValidationError("TSPLIB: bad integer '" + s + "'");
  }
}

} // namespace

IntMatrix scaled_weights(const ZoneTspInstance& instance) {
  IntMatrix m;
  m.dimension = instance.size();
  m.weights.reserve(instance.cost.size());
  for (const double c : instance.cost) {
    // nearbyint under the default rounding mode is round-half-even.
    m.weights.push_back(static_cast<long long>(std::nearbyint(c * weight_scale)));
  }
  return m;
}

std::string write_tsplib_atsp(const ZoneTspInstance& instance,
                              std::string_view name) {
  const IntMatrix m = scaled_weights(instance);
  std::string out;
  out += "NAME: ";
  out += name;
  out += "\nTYPE: ATSP\nDIMENSION: " + std::to_string(m.dimension) +
         "\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\n"
         "EDGE_WEIGHT_SECTION\n";
  for (std::size_t i = 0; i < m.dimension; ++i) {
    for (std::size_t j = 0; j < m.dimension; ++j) {
      if (j > 0) {
        out += ' ';
      }
      out += std::to_string(m.weights[i * m.dimension + j]);
    }
    out += '\n';
  }
  out += "EOF\n";
  return out;
}

IntMatrix parse_tsplib_atsp(std::string_view text) {
  const auto tok = tokens(text);
  IntMatrix m;
  bool have_dim = false;
  std::size_t i = 0;
  while (i < tok.size()) {
    const std::string& key = tok[i];
    if (key == "DIMENSION" && i + 1 < tok.size()) {
      m.dimension = static_cast<std::size_t>(to_int(tok[i + 1]));
      have_dim = true;
      i += 2;
    } else if (key == "TYPE" && i + 1 < tok.size()) {
      if (tok[i + 1] != "ATSP") {
        throw ValidationError("TSPLIB: expected TYPE ATSP, got " + tok[i + 1]);
      }
      i += 2;
    } else if (key == "EDGE_WEIGHT_SECTION") {
      if (!have_dim) {
        throw ValidationError("TSPLIB: EDGE_WEIGHT_SECTION before DIMENSION");
      }
      const std::size_t count = m.dimension * m.dimension;
      if (i + 1 + count > tok.size()) {
        throw ValidationError("TSPLIB: edge weight section is truncated");
      }
      for (std::size_t k = 0; k < count; ++k) {
        m.weights.push_back(to_int(tok[i + 1 + k]));
      }
      i += 1 + count;
    } else if (key == "EOF") {
      break;
    } else {
      ++i;
    }
  }
  if (!have_dim || m.weights.size() != m.dimension * m.dimension) {
    throw ValidationError("TSPLIB: missing DIMENSION or edge weights");
  }
  return m;
}

std::string write_solver_parameters(const std::filesystem::path& problem,
                                    const std::filesystem::path& tour,
                                    std::uint64_t seed) {
  std::ostringstream out;
  out << "PROBLEM_FILE = " << problem.string() << "\n"
      << "TOUR_FILE = " << tour.string() << "\n"
      << "RUNS = 1\n"
      << "SEED = " << seed << "\n";
  return out.str();
}

TourOrder parse_tsplib_tour(std::string_view text, std::size_t dimension) {
  const auto tok = tokens(text);
  const auto section = std::ranges::find(tok, "TOUR_SECTION");
  if (section == tok.end()) {
    throw ValidationError("TSPLIB tour: missing TOUR_SECTION");
  }
  TourOrder tour;
  std::vector<bool> seen(dimension, false);
  for (auto it = section + 1; it != tok.end(); ++it) {
    const long long v = to_int(*it);
    if (v == -1) {
      break;
    }
    if (v < 1 || static_cast<std::size_t>(v) > dimension ||
        seen[static_cast<std::size_t>(v - 1)]) {
      throw ValidationError("TSPLIB tour: invalid node " + *it);
    }
    seen[static_cast<std::size_t>(v - 1)] = true;
    tour.push_back(static_cast<Index>(v - 1));
  }
  if (tour.size() != dimension) {
    throw ValidationError("TSPLIB tour lists " + std::to_string(tour.size()) +
                          " of " + std::to_string(dimension) + " nodes");
  }
  return tour;
}

ExternalSolver::ExternalSolver(std::filesystem::path executable,
                               std::filesystem::path work_dir)
  : _exe(std::move(executable)), _work_dir(std::move(work_dir)) {
  if (_work_dir.empty()) {
    _work_dir = std::filesystem::temp_directory_path();
  }
}

TourOrder ExternalSolver::solve(const ZoneTspInstance& instance,
                                std::uint64_t seed) const {
  if (instance.start_index != 0) {
    throw ValidationError("external solver expects the last stop at node 1");
  }
  const auto job = std::to_string(::getpid()) + "-" +
                   std::to_string(job_counter.fetch_add(1));
  const auto dir = _work_dir / ("zoneseq-" + job);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  const auto problem = dir / "zone.atsp";
  const auto params = dir / "zone.par";
  const auto tour_file = dir / "zone.tour";
  io::write_file_atomic(problem, write_tsplib_atsp(instance, "zone"));
  io::write_file_atomic(params, write_solver_parameters(problem, tour_file, seed));

  const pid_t pid = ::fork();
  if (pid < 0) {
    throw IoError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) {
      ::dup2(devnull, STDOUT_FILENO);
      ::dup2(devnull, STDERR_FILENO);
    }
    const std::string exe = _exe.string();
    const std::string par = params.string();
    char* argv[] = {const_cast<char*>(exe.c_str()), const_cast<char*>(par.c_str()),
                    nullptr};
    ::execv(exe.c_str(), argv);
    ::_exit(127);
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      throw IoError(std::string("waitpid failed: ") + std::strerror(errno));
    }
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::filesystem::remove_all(dir, ec);
    throw IoError("external solver " + _exe.string() + " failed");
  }
  TourOrder tour;
  try {
    tour = parse_tsplib_tour(io::read_file(tour_file), instance.size());
  } catch (...) {
    std::filesystem::remove_all(dir, ec);
    throw;
  }
  std::filesystem::remove_all(dir, ec);
  return tour;
}

} // namespace zoneseq::tsp
