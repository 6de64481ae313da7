#include <chrono>
#include <iostream>

#include "aara/driver.hpp"

using namespace aara;

namespace {

template <class F>
double timeMs(F&& f, int reps) {
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  std::string dir = argc > 1 ? argv[1] : "corpus";
  int trials = argc > 2 ? std::atoi(argv[2]) : 100;
  int reps = argc > 3 ? std::atoi(argv[3]) : 3;
  double serialTotal = 0, parallelTotal = 0;
  for (const auto& g : driver::loadCorpus(dir)) {
    if (g.status != "bounded") continue;
    auto an = driver::analyzeEntry(g.programFile, g.entry);
    if (!an.result) continue;
    driver::VerifyOptions o;
    o.trials = trials;
    o.tightFamily = g.tightFamily;
    driver::VerifyReport s, p;
    double ts = timeMs([&] { s = driver::verifySerial(an.program, *an.result, o); }, reps);
    double tp = timeMs([&] { p = driver::verifyParallel(an.program, *an.result, o); }, reps);
    bool same = s.minSlack == p.minSlack && s.violations() == p.violations();
    serialTotal += ts;
    parallelTotal += tp;
    std::cout << g.name << ": serial " << ts << " ms, parallel " << tp << " ms, speedup " << ts / tp
              << (same ? "" : "  RESULTS DIFFER") << "\n";
    if (!same) return 1;
  }
  std::cout << "total: serial " << serialTotal << " ms, parallel " << parallelTotal << " ms, speedup "
            << serialTotal / parallelTotal << "\n";
  return 0;
}
