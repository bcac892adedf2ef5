#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sigdiag/linalg.hpp"
#include "sigdiag/nn.hpp"
#include "sigdiag/sigcore.hpp"

namespace testsupport {

// Independent signature oracle: refine the polyline into `steps` uniform
// increments and sum over strictly increasing step indices,
//   S_(i1..ik) ~= sum_{t1<...<tk} dx^(i1)[t1] ... dx^(ik)[tk],
// via the descending-level DP. Index arithmetic is rebuilt here on purpose;
// it must not share code with the production signature.
sigdiag::SignatureVector quadrature_signature(const sigdiag::PiecewiseLinearPath& path,
                                              std::size_t level, std::size_t steps);

// Central finite difference of a scalar function at x, step h.
double central_difference(const std::function<double(double)>& f, double x, double h);

// Largest |a-b| / max(1, |b|) over two equal-length vectors.
double max_rel_diff(const sigdiag::Vector& a, const sigdiag::Vector& b);

// All parameters of a network flattened in layer order (weights then biases).
sigdiag::Vector flatten_params(const sigdiag::DenseNetwork& net);

// RAII temporary directory under the system temp root.
class TmpDir {
 public:
  TmpDir();
  ~TmpDir();
  TmpDir(const TmpDir&) = delete;
  TmpDir& operator=(const TmpDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

// Run a shell command, capturing combined output.
CommandResult run_command(const std::string& command);

}  // namespace testsupport
