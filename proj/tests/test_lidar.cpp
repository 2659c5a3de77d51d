#include <catch_amalgamated.hpp>

#include <random>

#include "sogm/lidar/beam.hpp"
#include "sogm/lidar/splat.hpp"

using namespace sogm;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kDeg = M_PI / 180.0;

/// Independent oracle: central finite differences of beam_to_point.
Eigen::Matrix<double, 3, 4> fd_jacobian(const LidarMount& mount, const LidarBeam& beam,
                                        double step = 1e-6) {
    Eigen::Matrix<double, 3, 4> J;
    for (int k = 0; k < 4; ++k) {
        LidarBeam lo = beam, hi = beam;
        double* plo = k == 0 ? &lo.range : (k == 1 ? &lo.phi : (k == 2 ? &lo.gamma : &lo.xi));
        double* phi_ = k == 0 ? &hi.range : (k == 1 ? &hi.phi : (k == 2 ? &hi.gamma : &hi.xi));
        *plo -= step;
        *phi_ += step;
        J.col(k) = (beam_to_point(mount, hi) - beam_to_point(mount, lo)) / (2.0 * step);
    }
    return J;
}

LidarBeam random_beam(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-80.0 * kDeg, 80.0 * kDeg);
    std::uniform_real_distribution<double> range(0.1, 20.0);
    LidarBeam b;
    b.range = range(rng);
    b.phi = angle(rng);
    b.gamma = angle(rng);
    b.xi = angle(rng);
    return b;
}

} // namespace

TEST_CASE("beam_to_point axis cases") {
    LidarMount mount;
    LidarBeam b;
    b.range = 5.0;
    CHECK((beam_to_point(mount, b) - Eigen::Vector3d(5, 0, 0)).norm() < 1e-12);

    b.phi = 45.0 * kDeg;
    b.range = std::sqrt(2.0);
    CHECK((beam_to_point(mount, b) - Eigen::Vector3d(1, 0, -1)).norm() < 1e-12);

    b = LidarBeam{};
    b.range = 5.0;
    mount.translation = Eigen::Vector3d(0, 0, 2);
    CHECK((beam_to_point(mount, b) - Eigen::Vector3d(5, 0, 2)).norm() < 1e-12);
}

TEST_CASE("jacobian at zero angles") {
    LidarMount mount;
    LidarBeam b;
    b.range = 10.0;
    const auto J = beam_jacobian(mount, b);
    CHECK((J.col(0) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
    CHECK((J.col(1) - Eigen::Vector3d(0, 0, -10)).norm() < 1e-12);
    CHECK((J.col(2) - Eigen::Vector3d(0, 10, 0)).norm() < 1e-12);
    CHECK(J.col(3).norm() < 1e-12);
}

TEST_CASE("jacobian angle columns vanish at S=0") {
    LidarMount mount;
    LidarBeam b;
    b.range = 0.0;
    b.phi = 0.3;
    b.gamma = -0.7;
    b.xi = 0.2;
    const auto J = beam_jacobian(mount, b);
    CHECK(J.col(1).norm() == 0.0);
    CHECK(J.col(2).norm() == 0.0);
    CHECK(J.col(3).norm() == 0.0);
}

TEST_CASE("jacobian matches finite differences on 1000 random beams") {
    std::mt19937_64 rng(2024);
    LidarMount mount;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const LidarBeam b = random_beam(rng);
        const Eigen::Matrix<double, 3, 4> diff = beam_jacobian(mount, b) - fd_jacobian(mount, b);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("full covariance worked example") {
    LidarMount mount;
    mount.sigma_s = 0.05;
    mount.sigma_phi = 0.01;
    mount.sigma_gamma = 0.01;
    mount.sigma_x = 0.1;
    mount.sigma_y = 0.1;
    LidarBeam b;
    b.range = 10.0;
    const Eigen::Matrix3d cov = full_covariance(mount, b);
    // xx = sigma_s^2 + sigma_x^2, yy = S^2 sigma_gamma^2 + sigma_y^2,
    // zz = S^2 sigma_phi^2
    CHECK_THAT(cov(0, 0), WithinAbs(0.0125, 1e-12));
    CHECK_THAT(cov(1, 1), WithinAbs(0.02, 1e-12));
    CHECK_THAT(cov(2, 2), WithinAbs(0.01, 1e-12));
    CHECK(cov.isApprox(cov.transpose()));
}

TEST_CASE("zero sigmas give the zero matrix") {
    LidarMount mount;
    LidarBeam b;
    b.range = 3.0;
    b.phi = 0.4;
    CHECK(full_covariance(mount, b).norm() == 0.0);
    CHECK(simplified_covariance(mount, b).norm() == 0.0);
}

TEST_CASE("covariance is PSD for random inputs") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> sig(0.0, 0.5);
    for (int k = 0; k < 500; ++k) {
        LidarMount mount;
        mount.sigma_s = sig(rng);
        mount.sigma_phi = sig(rng);
        mount.sigma_gamma = sig(rng);
        mount.sigma_xi = sig(rng);
        mount.sigma_x = sig(rng);
        mount.sigma_y = sig(rng);
        mount.sigma_z = sig(rng);
        const LidarBeam b = random_beam(rng);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(full_covariance(mount, b));
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("simplified covariance worked example") {
    LidarMount mount;
    mount.sigma_gamma = 0.01;
    LidarBeam b;
    b.range = 10.0;
    const Eigen::Matrix2d cov = simplified_covariance(mount, b);
    CHECK_THAT(cov(0, 0), WithinAbs(0.0, 1e-12));
    CHECK_THAT(cov(1, 1), WithinAbs(0.01, 1e-12));
}

TEST_CASE("simplified model equals full xy-block when roll is absent") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> sig(0.0, 0.3);
    for (int k = 0; k < 1000; ++k) {
        LidarMount mount;
        mount.sigma_s = sig(rng);
        mount.sigma_phi = sig(rng);
        mount.sigma_gamma = sig(rng);
        mount.sigma_x = sig(rng);
        mount.sigma_y = sig(rng);
        mount.sigma_z = sig(rng); // z uncertainty must not leak into xy
        LidarBeam b = random_beam(rng);
        b.xi = 0.0;
        const Eigen::Matrix2d simp = simplified_covariance(mount, b);
        const Eigen::Matrix2d full_xy = full_covariance(mount, b).topLeftCorner<2, 2>();
        CHECK((simp - full_xy).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((simplified_point(mount, b) - beam_to_point(mount, b)).norm() < 1e-12);
    }
}

TEST_CASE("zz covariance grows monotonically with range") {
    LidarMount mount;
    mount.sigma_phi = 0.02;
    double prev = -1.0;
    for (double S = 0.5; S < 20.0; S += 0.5) {
        LidarBeam b;
        b.range = S;
        const double zz = full_covariance(mount, b)(2, 2);
        CHECK(zz >= prev);
        prev = zz;
    }
}

TEST_CASE("splat peak, kernel value, and truncation") {
    const double conf = 0.9;
    const double sigma = 0.2;
    const Eigen::Matrix2d cov = Eigen::Vector2d(sigma * sigma, sigma * sigma).asDiagonal();
    const double res = 0.01; // fine resolution so cell centers land close to test points
    const Eigen::Vector2d mean(0.005, 0.005); // on a cell center of the lattice
    const IsmPatch patch = splat_gaussian(mean, cov, conf, "crop", res);

    auto value_at = [&](double x, double y) {
        const int i = static_cast<int>(std::floor((x - patch.anchor.x) / res));
        const int j = static_cast<int>(std::floor((y - patch.anchor.y) / res));
        return patch.at(i, j);
    };
    CHECK_THAT(value_at(mean.x(), mean.y()), WithinAbs(conf, 1e-9));
    CHECK_THAT(value_at(mean.x() + sigma, mean.y()),
               WithinAbs(0.5 + (conf - 0.5) * std::exp(-0.5), 1e-3));
    // corner of the bounding box lies beyond the 3-sigma ellipse
    CHECK(patch.at(0, 0) == 0.5);
    // all cells beyond 3 sigma exactly 0.5
    for (int j = 0; j < patch.height; ++j)
        for (int i = 0; i < patch.width; ++i) {
            double wx, wy;
            patch.cell_center(i, j, wx, wy);
            const Eigen::Vector2d d(wx - mean.x(), wy - mean.y());
            if (d.norm() > 3.0 * sigma + 1e-9) CHECK(patch.at(i, j) == 0.5);
        }
}

TEST_CASE("splat rejects non-PSD covariance and regularizes degenerate ones") {
    Eigen::Matrix2d bad;
    bad << 1.0, 0.0, 0.0, -0.1;
    CHECK_THROWS_AS(splat_gaussian(Eigen::Vector2d::Zero(), bad, 0.9, "l", 0.1), Error);
    // exactly zero covariance still yields a finite single-peak patch
    const IsmPatch p =
        splat_gaussian(Eigen::Vector2d(0.05, 0.05), Eigen::Matrix2d::Zero(), 0.9, "l", 0.1);
    double peak = 0.5;
    for (double v : p.cells) peak = std::max(peak, v);
    CHECK_THAT(peak, WithinAbs(0.9, 1e-9));
}
