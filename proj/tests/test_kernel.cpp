#include <doctest.h>

#include <cmath>

#include "cmmd/kernel.hpp"
#include "cmmd/linalg.hpp"
#include "cmmd/rng.hpp"

using namespace cmmd;

namespace {

SeKernel make_kernel(double lengthscale, double amplitude) {
    SeKernel k;
    k.log_lengthscale = std::log(lengthscale);
    k.log_amplitude = std::log(amplitude);
    return k;
}

Vector random_vec(std::size_t dim, Rng& rng) {
    Vector v(dim);
    for (double& x : v) x = rng.normal();
    return v;
}

}  // namespace

TEST_CASE("kernel evaluation basics") {
    SeKernel k = make_kernel(0.7, 2.5);
    Vector u{0.3, -0.1};
    CHECK(kernel_eval(k, u, u) == doctest::Approx(2.5 * 2.5));

    SeKernel unit = make_kernel(1.0, 1.0);
    CHECK(kernel_eval(unit, {0.0}, {1.0}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));

    SeKernel flat = make_kernel(1e8, 1.3);
    CHECK(std::fabs(kernel_eval(flat, {0.0}, {5.0}) - 1.3 * 1.3) < 1e-12);

    CHECK_THROWS_AS(kernel_eval(k, {0.0}, {0.0, 1.0}), DimensionMismatch);
}

TEST_CASE("gram matrix examples") {
    SeKernel unit = make_kernel(1.0, 1.0);
    std::vector<Vector> xs{{0.0}, {1.0}};
    Matrix g = gram(unit, xs);
    CHECK(g(0, 0) == doctest::Approx(1.0));
    CHECK(g(1, 1) == doctest::Approx(1.0));
    CHECK(g(0, 1) == doctest::Approx(std::exp(-0.5)));
    CHECK(g(1, 0) == doctest::Approx(std::exp(-0.5)));

    SeKernel k = make_kernel(1.0, 1.7);
    Matrix single = gram(k, {{0.4}});
    CHECK(single.rows() == 1);
    CHECK(single(0, 0) == doctest::Approx(1.7 * 1.7));

    SeKernel narrow = make_kernel(1e-3, 1.0);
    Matrix far = gram(narrow, {{0.0}, {10.0}}, {{5.0}, {20.0}});
    for (double v : far.data()) CHECK(v < 1e-12);
}

TEST_CASE("gram + lambda*I admits a Cholesky factorization") {
    Rng rng(11);
    SeKernel k = make_kernel(0.5, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Vector> xs;
        for (int i = 0; i < 12; ++i) xs.push_back(random_vec(2, rng));
        Matrix g = gram(k, xs);
        for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += 1e-8;
        CHECK_NOTHROW(CholeskyFactor{g});
    }
}

TEST_CASE("kernel symmetry and bounds") {
    Rng rng(12);
    SeKernel k = make_kernel(0.8, 1.4);
    for (int rep = 0; rep < 100; ++rep) {
        Vector u = random_vec(3, rng);
        Vector v = random_vec(3, rng);
        const double kuv = kernel_eval(k, u, v);
        CHECK(kuv == kernel_eval(k, v, u));
        CHECK(kuv > 0.0);
        CHECK(kuv <= 1.4 * 1.4 + 1e-15);
    }
}

TEST_CASE("gradient with respect to the second input") {
    SeKernel unit = make_kernel(1.0, 1.0);
    Vector u{0.2, -0.4};
    Vector zero_grad = grad_wrt_second(unit, u, u);
    for (double g : zero_grad) CHECK(g == doctest::Approx(0.0));

    Vector g = grad_wrt_second(unit, {0.0}, {1.0});
    CHECK(g[0] == doctest::Approx(-std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("parameter gradients at zero distance") {
    SeKernel k = make_kernel(0.9, 1.5);
    Vector u{0.1, 0.2};
    auto [dl, ds] = grad_wrt_params(k, u, u);
    CHECK(dl == doctest::Approx(0.0));
    CHECK(ds == doctest::Approx(2.0 * 1.5 * 1.5));
}

TEST_CASE("parameter gradients, hand-computed scalar case") {
    SeKernel unit = make_kernel(1.0, 1.0);
    auto [dl, ds] = grad_wrt_params(unit, {0.0}, {1.0});
    CHECK(dl == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
    CHECK(ds == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("all kernel gradients match central finite differences") {
    Rng rng(13);
    const double h = 1e-5;
    for (int rep = 0; rep < 100; ++rep) {
        SeKernel k = make_kernel(std::exp(rng.uniform(-1.0, 1.0)),
                                 std::exp(rng.uniform(-1.0, 1.0)));
        Vector u = random_vec(2, rng);
        Vector v = random_vec(2, rng);

        Vector gv = grad_wrt_second(k, u, v);
        for (std::size_t c = 0; c < v.size(); ++c) {
            Vector vp = v, vm = v;
            vp[c] += h;
            vm[c] -= h;
            const double fd = (kernel_eval(k, u, vp) - kernel_eval(k, u, vm)) / (2.0 * h);
            CHECK(gv[c] == doctest::Approx(fd).epsilon(1e-6));
        }

        auto [dl, ds] = grad_wrt_params(k, u, v);
        SeKernel kp = k, km = k;
        kp.log_lengthscale += h;
        km.log_lengthscale -= h;
        const double fd_l = (kernel_eval(kp, u, v) - kernel_eval(km, u, v)) / (2.0 * h);
        CHECK(dl == doctest::Approx(fd_l).epsilon(1e-6));
        kp = km = k;
        kp.log_amplitude += h;
        km.log_amplitude -= h;
        const double fd_s = (kernel_eval(kp, u, v) - kernel_eval(km, u, v)) / (2.0 * h);
        CHECK(ds == doctest::Approx(fd_s).epsilon(1e-6));
    }
}

TEST_CASE("median heuristic") {
    std::vector<Vector> xs{{0.0}, {1.0}, {2.0}};
    // pairwise distances {1, 1, 2}; median 1
    CHECK(median_heuristic(xs) == doctest::Approx(1.0));
    CHECK(median_heuristic({{3.0}, {3.0}}) == doctest::Approx(1.0));  // degenerate fallback
}
