#include "xcsf/metrics.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace xcsf {

double mse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("mse: length mismatch");
    if (a.empty()) throw std::invalid_argument("mse: empty vectors");
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] - b[i]) * (a[i] - b[i]);
    return e / static_cast<double>(a.size());
}

double auc_simpson(std::span<const double> v) {
    if (v.size() < 3) throw std::invalid_argument("auc_simpson: need at least 3 samples");
    const std::size_t odd = v.size() % 2 == 1 ? v.size() : v.size() - 1;
    double s = v[0] + v[odd - 1];
    for (std::size_t i = 1; i + 1 < odd; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * v[i];
    double area = s / 3.0;
    if (odd != v.size()) area += 0.5 * (v[v.size() - 2] + v[v.size() - 1]);
    return area;
}

Checkpoint population_stats(const Population& pop) {
    Checkpoint c;
    c.macro_count = pop.members.size();
    const auto micro = static_cast<double>(pop.micro_size());
    if (micro == 0) return c;
    double layers = 0.0;
    for (const auto& cl : pop.members) {
        const auto w = static_cast<double>(cl.num);
        c.C_h += w * static_cast<double>(cl.condition.hidden_size());
        c.P_h += w * static_cast<double>(cl.prediction.hidden_size());
        c.C_w_total += w * static_cast<double>(cl.condition.active_weights());
        c.P_w_total += w * static_cast<double>(cl.prediction.active_weights());
        for (const Network* net : {&cl.condition, &cl.prediction}) {
            for (const auto& l : net->layers) {
                for (std::size_t k = 0; k < 4; ++k) c.mean_mu[k] += w * l.mu[k];
                c.mean_eta += w * l.eta;
                layers += w;
            }
        }
    }
    c.C_h /= micro;
    c.P_h /= micro;
    c.C_w = c.C_w_total / micro;
    c.P_w = c.P_w_total / micro;
    for (auto& m : c.mean_mu) m /= layers;
    c.mean_eta /= layers;
    return c;
}

namespace {

std::string num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_num(const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::invalid_argument("invalid metrics field: " + s);
    return v;
}

}  // namespace

std::string checkpoint_csv_header() {
    return "trial,train_mse,valid_mse,mfrac,C_h,P_h,C_w,P_w,C_w_total,P_w_total,M_size,"
           "macro_count,mu_weights,mu_neurons,mu_eta,mu_connections,mean_eta";
}

std::string checkpoint_csv_row(const Checkpoint& c) {
    std::string s = std::to_string(c.trial);
    for (double v : {c.train_mse, c.valid_mse, c.mfrac, c.C_h, c.P_h, c.C_w, c.P_w, c.C_w_total,
                     c.P_w_total, c.M_size})
        s += ',' + num(v);
    s += ',' + std::to_string(c.macro_count);
    for (double m : c.mean_mu) s += ',' + num(m);
    s += ',' + num(c.mean_eta);
    return s;
}

Checkpoint parse_checkpoint_csv_row(const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 17) throw std::invalid_argument("metrics row must have 17 fields");
    Checkpoint c;
    c.trial = static_cast<std::uint64_t>(parse_num(f[0]));
    double* fields[] = {&c.train_mse, &c.valid_mse, &c.mfrac, &c.C_h,       &c.P_h,
                        &c.C_w,       &c.P_w,       &c.C_w_total, &c.P_w_total, &c.M_size};
    for (std::size_t i = 0; i < 10; ++i) *fields[i] = parse_num(f[i + 1]);
    c.macro_count = static_cast<std::uint64_t>(parse_num(f[11]));
    for (std::size_t k = 0; k < 4; ++k) c.mean_mu[k] = parse_num(f[12 + k]);
    c.mean_eta = parse_num(f[16]);
    return c;
}

}  // namespace xcsf
