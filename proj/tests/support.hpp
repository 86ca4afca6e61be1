#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "credhedge/core.hpp"

namespace credhedge::testing {

inline Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline std::vector<Date> business_days(Date start, std::size_t n) {
    std::vector<Date> out;
    Date d = is_weekday(start) ? start : next_business_day(start);
    while (out.size() < n) {
        out.push_back(d);
        d = next_business_day(d);
    }
    return out;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("credhedge_test_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path write(const std::string& name, const std::string& body) const {
        const auto p = path_ / name;
        std::ofstream(p) << body;
        return p;
    }

private:
    std::filesystem::path path_;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Risk-neutral lognormal terminal price law for spot s, zero rates.
inline double lognormal_cdf(double k, double s, double sigma, double tau) {
    const double sd = sigma * std::sqrt(tau);
    return normal_cdf((std::log(k / s) + 0.5 * sd * sd) / sd);
}

inline double lognormal_pdf(double k, double s, double sigma, double tau) {
    const double sd = sigma * std::sqrt(tau);
    const double z = (std::log(k / s) + 0.5 * sd * sd) / sd;
    return std::exp(-0.5 * z * z) / (k * sd * std::sqrt(2.0 * std::numbers::pi));
}

/// Composite Simpson integral of f over [a, b] with n (even) panels.
template <typename F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    return ca.dot(cb) / (ca.norm() * cb.norm());
}

}  // namespace credhedge::testing
