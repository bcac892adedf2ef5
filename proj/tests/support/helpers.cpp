#include "helpers.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <random>

#if __has_include(<sys/wait.h>)
#include <sys/wait.h>
#endif

#include "sigdiag/common.hpp"
#include "sigdiag/io_util.hpp"

namespace testsupport {

sigdiag::SignatureVector quadrature_signature(const sigdiag::PiecewiseLinearPath& path,
                                              std::size_t level, std::size_t steps) {
  path.validate();
  const std::size_t d = path.dimension();

  // Flat layout rebuilt from scratch: level k starts at d + d^2 + ... +
  // d^(k-1); within the level the last index varies fastest.
  std::vector<std::size_t> level_size(level + 1, 0);
  std::vector<std::size_t> level_start(level + 1, 0);
  std::size_t total = 0;
  std::size_t power = 1;
  for (std::size_t k = 1; k <= level; ++k) {
    power *= d;
    level_size[k] = power;
    level_start[k] = total;
    total += power;
  }

  // Uniform refinement of the whole polyline by arc position: `steps`
  // increments distributed over segments proportionally to step count, not
  // length; only the increment sequence matters for the sum.
  const std::size_t segments = path.points.size() - 1;
  sigdiag::Vector acc(total, 0.0);  // levels 1..m, level 0 == 1 implicitly
  std::vector<sigdiag::Vector> delta(segments, sigdiag::Vector(d, 0.0));
  for (std::size_t s = 0; s < segments; ++s) {
    for (std::size_t c = 0; c < d; ++c) {
      delta[s][c] = path.points[s + 1][c] - path.points[s][c];
    }
  }

  const std::size_t per_segment = steps / segments + (steps % segments != 0 ? 1 : 0);
  for (std::size_t s = 0; s < segments; ++s) {
    sigdiag::Vector step(d);
    for (std::size_t c = 0; c < d; ++c) {
      step[c] = delta[s][c] / static_cast<double>(per_segment);
    }
    for (std::size_t t = 0; t < per_segment; ++t) {
      // Descending level order: each step contributes at most one letter, so
      // the sum runs over strictly increasing step indices.
      for (std::size_t k = level; k >= 2; --k) {
        sigdiag::Vector& out = acc;
        const std::size_t lo = level_start[k];
        const std::size_t plo = level_start[k - 1];
        for (std::size_t prefix = 0; prefix < level_size[k - 1]; ++prefix) {
          const double base = out[plo + prefix];
          if (base == 0.0) {
            continue;
          }
          for (std::size_t letter = 0; letter < d; ++letter) {
            out[lo + prefix * d + letter] += base * step[letter];
          }
        }
      }
      for (std::size_t letter = 0; letter < d; ++letter) {
        acc[level_start[1] + letter] += step[letter];
      }
    }
  }

  sigdiag::SignatureVector sig;
  sig.dimension = d;
  sig.level = level;
  sig.terms = std::move(acc);
  return sig;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double max_rel_diff(const sigdiag::Vector& a, const sigdiag::Vector& b) {
  if (a.size() != b.size()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return worst;
}

sigdiag::Vector flatten_params(const sigdiag::DenseNetwork& net) {
  sigdiag::Vector flat;
  for (const sigdiag::DenseLayer& layer : net.layers) {
    flat.insert(flat.end(), layer.weights.data.begin(), layer.weights.data.end());
    flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
  }
  return flat;
}

TmpDir::TmpDir() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 64; ++attempt) {
    char name[32];
    std::snprintf(name, sizeof name, "sigdiag-%08x", rd());
    std::filesystem::path candidate = base / name;
    std::error_code ec;
    if (std::filesystem::create_directory(candidate, ec) && !ec) {
      path_ = candidate;
      return;
    }
  }
  throw sigdiag::IoError("TmpDir: could not create a unique temp directory");
}

TmpDir::~TmpDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

CommandResult run_command(const std::string& command) {
  TmpDir dir;
  const std::string capture = dir.file("out.txt");
  const std::string full = command + " >" + capture + " 2>&1";
  const int status = std::system(full.c_str());
  CommandResult result;
#if defined(WIFEXITED)
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else {
    result.exit_code = -1;
  }
#else
  result.exit_code = status;
#endif
  std::error_code ec;
  if (std::filesystem::exists(capture, ec)) {
    result.output = sigdiag::read_file(capture);
  }
  return result;
}

}  // namespace testsupport
