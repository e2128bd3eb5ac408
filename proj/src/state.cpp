#include "cbho/state.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "cbho/errors.hpp"

namespace cbho {

void SiteWindow::validate() const {
  if (n_min >= n_max) throw WindowError("site window requires n_min < n_max");
  if (length() < min_length)
    throw WindowError("site window must hold at least " + std::to_string(min_length) + " sites");
}

WavepacketState::WavepacketState(SiteWindow window, std::vector<cplx> amplitudes, double time)
    : window_(window), amps_(std::move(amplitudes)), time_(time) {
  window_.validate();
  if (static_cast<std::int64_t>(amps_.size()) != window_.length())
    throw DomainError("amplitude count does not match the site window");
}

cplx WavepacketState::at(std::int64_t n) const {
  if (n < window_.n_min || n > window_.n_max) return {};
  return amps_[static_cast<std::size_t>(n - window_.n_min)];
}

double WavepacketState::norm() const {
  double sum = 0.0;
  for (const cplx& c : amps_) sum += std::norm(c);
  return sum;
}

void WavepacketState::normalize() {
  const double nrm = norm();
  if (!(nrm > 0.0)) throw DomainError("cannot normalize a zero state");
  const double scale = 1.0 / std::sqrt(nrm);
  for (cplx& c : amps_) c *= scale;
}

double WavepacketState::edge_density() const {
  return std::norm(amps_.front()) + std::norm(amps_.back());
}

WavepacketState init_gaussian(const InitialCondition& ic, const SiteWindow& w) {
  if (!(ic.sigma_n > 0.0)) throw DomainError("sigma_n must be positive");
  if (!(ic.k0 >= -0.5 && ic.k0 <= 0.5)) throw DomainError("k0 must lie in [-1/2, 1/2]");
  w.validate();
  const double reach = 8.0 * ic.sigma_n;
  if (!w.contains(ic.n0 - reach, ic.n0 + reach))
    throw WindowError("site window does not contain n0 +/- 8 sigma_n");

  const double pref = 1.0 / std::sqrt(ic.sigma_n * std::sqrt(std::numbers::pi));
  const double kphase = 2.0 * std::numbers::pi * ic.k0;
  std::vector<cplx> amps(static_cast<std::size_t>(w.length()));
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double n = static_cast<double>(w.n_min + static_cast<std::int64_t>(i));
    const double x = (n - ic.n0) / ic.sigma_n;
    amps[i] = pref * std::exp(-0.5 * x * x) * std::polar(1.0, -kphase * n);
  }
  WavepacketState s(w, std::move(amps), 0.0);
  s.normalize();
  return s;
}

SiteWindow default_window(const InitialCondition& ic, const ModelParams& mp, double /*horizon*/,
                          double margin) {
  const double n_c = mp.K0 > 0.0 ? std::sqrt(2.0 * mp.J / mp.K0) : 0.0;
  const double span = 8.0 * ic.sigma_n + n_c + margin;
  SiteWindow w{static_cast<std::int64_t>(std::floor(ic.n0 - span)),
               static_cast<std::int64_t>(std::ceil(ic.n0 + span))};
  return w;
}

void write_state_csv(std::ostream& os, const WavepacketState& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# time=%.17g\n", s.time());
  os << buf << "n,re,im,abs2\n";
  const auto amps = s.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(s.site(i)),
                  amps[i].real(), amps[i].imag(), std::norm(amps[i]));
    os << buf;
  }
}

WavepacketState read_state_csv(std::istream& is) {
  std::string line;
  double time = 0.0;
  if (!std::getline(is, line) || line.rfind("# time=", 0) != 0)
    throw IoError("state CSV: missing '# time=' line");
  time = std::stod(line.substr(7));
  if (!std::getline(is, line) || line.rfind("n,re,im", 0) != 0)
    throw IoError("state CSV: missing header row");

  std::vector<cplx> amps;
  std::int64_t first = 0, expected = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    long long n = 0;
    double re = 0.0, im = 0.0;
    std::istringstream row(line);
    char comma = 0;
    std::string re_s, im_s;
    if (!(row >> n >> comma) || comma != ',') throw IoError("state CSV: bad row '" + line + "'");
    if (!std::getline(row, re_s, ',') || !std::getline(row, im_s, ','))
      throw IoError("state CSV: bad row '" + line + "'");
    re = std::strtod(re_s.c_str(), nullptr);
    im = std::strtod(im_s.c_str(), nullptr);
    if (amps.empty()) {
      first = expected = n;
    }
    if (n != expected) throw IoError("state CSV: site indices must be contiguous");
    ++expected;
    amps.emplace_back(re, im);
  }
  if (amps.empty()) throw IoError("state CSV: no rows");
  return WavepacketState(SiteWindow{first, expected - 1}, std::move(amps), time);
}

}  // namespace cbho
