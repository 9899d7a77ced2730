#pragma once

#include <string>
#include <vector>

namespace bong::checks {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0;
  std::string detail;
};

struct CheckOptions {
  std::string data_dir = "data/mnist5k";  // holds the MNIST-subset IDX files
  std::string scratch_dir = "/tmp";
  bool verbose = false;
};

CheckResult conjugate_exactness(const CheckOptions& o);
CheckResult kalman_recovery(const CheckOptions& o);
CheckResult estimator_equivalence(const CheckOptions& o);
CheckResult structured_vs_dense(const CheckOptions& o);
CheckResult dlr_lossless_rank(const CheckOptions& o);
CheckResult mirror_descent(const CheckOptions& o);
CheckResult derivative_correctness(const CheckOptions& o);
CheckResult qualitative_ordering(const CheckOptions& o);
CheckResult complexity_slopes(const CheckOptions& o);
CheckResult determinism(const CheckOptions& o);

// Criteria by number, 1..10.
CheckResult run_check(int id, const CheckOptions& o);

// The fast oracle subset used by `bong selftest`.
std::vector<int> selftest_ids();

std::string format_line(const CheckResult& r);

}  // namespace bong::checks
