// Acceptance suite: runs every verification criterion at full scale and
// reports one pass/fail line per check. Exit status 0 iff all pass.
#include <cstring>
#include <iostream>

#include "srel/verify.hpp"

int main(int argc, char** argv) {
  srel::VerifyOptions opts;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) opts.quick = true;
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) opts.seed = std::strtoull(argv[++i], nullptr, 10);
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) opts.threads = std::atoi(argv[++i]);
  }
  const auto results = srel::run_verification(opts, std::cout);
  srel::print_check_table(results, std::cout);
  return srel::all_passed(results) ? 0 : 1;
}
