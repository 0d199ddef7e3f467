// decode_oracle: Monte Carlo compute-and-forward decode table, printed as CSV.
#include <CLI11.hpp>
#include <iostream>
#include <vector>

#include "mmtc/phy_capture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tabulate P(decode | snr, n) for one compute-and-forward equation"};
  std::vector<double> snrs{5, 10, 15, 20, 25, 30};
  int n_max = 9, trials = 20000;
  double rate = 0.25;
  std::uint64_t seed = 1;
  app.add_option("--snr", snrs, "SNR grid in dB")->delimiter(',');
  app.add_option("--n-max", n_max, "Largest collider count");
  app.add_option("--trials", trials, "Channel draws per entry");
  app.add_option("--rate", rate, "Code rate, bits per real dimension");
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  mmtc::SnrDecodeTable t;
  for (double s : snrs)
    for (int n = 1; n <= n_max; ++n) {
      mmtc::Rng rng = mmtc::make_stream(seed, "cf-oracle/" + std::to_string(s) + "/" + std::to_string(n));
      t.set(s, n, mmtc::cf_decode_oracle(s, n, trials, rng, rate));
    }
  std::cout << "# compute-and-forward oracle: rate " << rate << " bit/real dim, |a_i|<=3, " << trials
            << " draws per entry, seed " << seed << "\n";
  t.write_csv(std::cout);
}
