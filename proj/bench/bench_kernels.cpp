// Timings of the serial reference path, the incremental kernel, and the
// bootstrap with one worker versus all workers.
//
// usage: bench_kernels [T=500] [N=10] [B=100]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include <omp.h>

#include "depbreak/bootstrap.hpp"
#include "depbreak/copsim.hpp"
#include "depbreak/parallel.hpp"
#include "depbreak/reference.hpp"

using namespace depbreak;

namespace {

template <class F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t T = argc > 1 ? std::stoul(argv[1]) : 500;
  const std::size_t N = argc > 2 ? std::stoul(argv[2]) : 10;
  const std::size_t B = argc > 3 ? std::stoul(argv[3]) : 100;

  DgpSpec dgp = parse_dgp("factor:lambda=-0.5,theta0=1,theta1=1.5,s0=0.5");
  dgp.T = T;
  dgp.N = N;
  Rng rng = make_stream(1, {0});
  const Matrix values = simulate_panel(dgp, rng).values;
  const MeasureSpec spec = MeasureSpec::preset(1);
  BootstrapConfig config;
  config.B = B;
  config.seed = 7;

  std::cout << "T=" << T << " N=" << N << " B=" << B << " measures=" << spec.to_string()
            << " max_workers=" << omp_get_max_threads() << "\n";

  DependencePath fast, slow;
  const double t_kernel = seconds([&] { fast = dependence_path(values, spec, {}); });
  const double t_ref = seconds([&] { slow = reference::dependence_path(values, spec, 0.1); });
  double max_diff = 0.0;
  for (std::size_t r = 0; r < fast.grid.size(); ++r)
    for (std::size_t j = 0; j < spec.size(); ++j)
      max_diff = std::max(max_diff, std::abs(fast.values(r, j) - slow.values(r, j)));
  std::cout << "path  reference   " << t_ref << " s\n";
  std::cout << "path  incremental " << t_kernel << " s  (speedup " << t_ref / t_kernel << "x, max |diff| "
            << max_diff << ")\n";

  set_worker_count(1);
  TestResult serial, parallel;
  const double t_serial = seconds([&] { serial = run_test(values, spec, config); });
  set_worker_count(0);
  const double t_parallel = seconds([&] { parallel = run_test(values, spec, config); });
  std::cout << "bootstrap 1 worker   " << t_serial << " s\n";
  std::cout << "bootstrap " << worker_count() << " workers  " << t_parallel << " s  (speedup "
            << t_serial / t_parallel << "x, identical replicates: "
            << (serial.replicates == parallel.replicates ? "yes" : "no") << ")\n";

  if (T <= 300) {
    BootstrapConfig small = config;
    small.B = std::min<std::size_t>(B, 20);
    const double t_ref_boot = seconds([&] { reference::bootstrap_replicates(values, spec, small); });
    std::cout << "bootstrap reference (B=" << small.B << ") " << t_ref_boot << " s\n";
  }
  return 0;
}
