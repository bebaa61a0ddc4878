#include <gtest/gtest.h>

#include "support.hpp"

using namespace nira;
using namespace nira::test;

namespace {

FormVector box_forms(const Box& b)
{
    return region_to_forms(std::span<const double>(b.lower.data(), b.dim), std::span<const double>(b.upper.data(), b.dim));
}

// Reference propagation with the per-form operations.
AffineForm chain_forms(const MlpNetwork& net, const Box& b, const RaVariant& v)
{
    FormVector f = box_forms(b);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        f = apply_linear(f, net.layers[i], v);
        if (i + 1 < net.layers.size()) f = apply_activation(f, net.activation, v);
    }
    return f.forms.at(0);
}

std::vector<RaVariant> all_variants(std::size_t in_dim)
{
    return {RaVariant::full(), RaVariant::fixed(), RaVariant::truncate(RaVariant::default_limit(in_dim)),
            RaVariant::append(RaVariant::default_limit(in_dim)), RaVariant::truncate(4), RaVariant::append(5)};
}

double sample_value(const MlpNetwork& net, const Box& b, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec3 p{};
    for (std::size_t d = 0; d < b.dim; ++d) p[d] = b.lower[d] + (b.upper[d] - b.lower[d]) * u(rng);
    return forward(net, std::span<const double>(p.data(), net.input_dim));
}

} // namespace

TEST(RegionToForms, SquareGetsOneSymbolPerAxis)
{
    const double lo[] = {-1, -1}, hi[] = {1, 1};
    const FormVector f = region_to_forms(lo, hi);
    ASSERT_EQ(f.forms.size(), 2u);
    EXPECT_EQ(f.next_symbol, 2u);
    EXPECT_EQ(f.forms[0].center, 0.0);
    EXPECT_EQ(f.forms[0].coeff(0), 1.0);
    EXPECT_EQ(f.forms[0].coeff(1), 0.0);
    EXPECT_EQ(f.forms[1].coeff(1), 1.0);
    EXPECT_EQ(f.forms[1].coeff(0), 0.0);
}

TEST(RegionToForms, DegenerateAxisHasNoSymbol)
{
    const double lo[] = {3, 0}, hi[] = {3, 2};
    const FormVector f = region_to_forms(lo, hi);
    EXPECT_EQ(f.next_symbol, 1u);
    EXPECT_EQ(f.forms[0].center, 3.0);
    EXPECT_TRUE(f.forms[0].terms.empty());
    EXPECT_EQ(f.forms[1].center, 1.0);
    EXPECT_EQ(f.forms[1].coeff(0), 1.0);
}

TEST(RegionToForms, UnitCube)
{
    const FormVector f = box_forms(Box{{0, 0, 0}, {1, 1, 1}, 3});
    EXPECT_EQ(f.next_symbol, 3u);
    for (std::uint32_t d = 0; d < 3; ++d) {
        EXPECT_EQ(f.forms[d].center, 0.5);
        ASSERT_EQ(f.forms[d].terms.size(), 1u);
        EXPECT_EQ(f.forms[d].terms[0].id, d);
        EXPECT_EQ(f.forms[d].terms[0].coeff, 0.5);
    }
}

TEST(RegionToForms, InvertedBoundsRejected)
{
    const double lo[] = {1}, hi[] = {0};
    EXPECT_THROW(region_to_forms(lo, hi), ContractError);
}

TEST(ApplyLinear, ScalarAffineMap)
{
    FormVector x;
    x.forms.resize(1);
    x.forms[0].center = 3.0;
    x.forms[0].terms = {Term{0, 1.0}};
    x.next_symbol = 1;
    const FormVector y = apply_linear(x, layer(1, 1, {2}, {1}));
    EXPECT_EQ(y.forms[0].center, 7.0);
    EXPECT_EQ(y.forms[0].coeff(0), 2.0);
    EXPECT_EQ(y.forms[0].range(), (Interval{5, 9}));
}

TEST(ApplyLinear, ZeroLayerGivesConstants)
{
    const double lo[] = {-1, -1}, hi[] = {1, 1};
    const FormVector y = apply_linear(region_to_forms(lo, hi), layer(2, 2, {0, 0, 0, 0}, {4, -1}));
    EXPECT_EQ(y.forms[0].center, 4.0);
    EXPECT_EQ(y.forms[1].center, -1.0);
    EXPECT_TRUE(y.forms[0].terms.empty());
    EXPECT_TRUE(y.forms[1].terms.empty());
}

TEST(ApplyLinear, RotationMatchesHandExpansionAndSampledImage)
{
    const double lo[] = {-1, -1}, hi[] = {1, 1};
    const FormVector y = apply_linear(region_to_forms(lo, hi), layer(2, 2, {1, 1, 1, -1}, {0, 0}));
    EXPECT_EQ(y.forms[0].coeff(0), 1.0);
    EXPECT_EQ(y.forms[0].coeff(1), 1.0);
    EXPECT_EQ(y.forms[1].coeff(0), 1.0);
    EXPECT_EQ(y.forms[1].coeff(1), -1.0);
    EXPECT_EQ(y.forms[0].range(), (Interval{-2, 2}));
    EXPECT_EQ(y.forms[1].range(), (Interval{-2, 2}));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    double mx = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double a = u(rng), b = u(rng);
        EXPECT_TRUE(y.forms[0].range().contains(a + b));
        EXPECT_TRUE(y.forms[1].range().contains(a - b));
        mx = std::max(mx, std::fabs(a + b));
    }
    EXPECT_GT(mx, 1.95);
}

TEST(ApplyLinear, ErrAccumUsesAbsoluteWeights)
{
    FormVector x;
    x.forms.resize(2);
    x.forms[0].err_accum = 0.5;
    x.forms[1].err_accum = 0.25;
    const FormVector y = apply_linear(x, layer(1, 2, {-2, 4}, {0}));
    EXPECT_EQ(y.forms[0].err_accum, 2.0);
}

TEST(ApplyLinear, DimensionMismatch)
{
    const double lo[] = {-1, -1}, hi[] = {1, 1};
    EXPECT_THROW(apply_linear(region_to_forms(lo, hi), layer(1, 3, {1, 1, 1}, {0})), ContractError);
}

TEST(Minimax, ReluSymmetricInterval)
{
    const LinearApprox a = minimax_approx(Activation::ReLU, -1, 1);
    EXPECT_EQ(a.alpha, 0.5);
    EXPECT_EQ(a.beta, 0.25);
    EXPECT_NEAR(a.gamma, 0.25, 1e-14);
    EXPECT_GE(a.gamma, 0.25);
}

TEST(Minimax, ReluLinearPiece)
{
    const LinearApprox a = minimax_approx(Activation::ReLU, 1, 2);
    EXPECT_EQ(a.alpha, 1.0);
    EXPECT_EQ(a.beta, 0.0);
    EXPECT_EQ(a.gamma, 0.0);
}

TEST(Minimax, SineSmallSymmetricInterval)
{
    const LinearApprox a = minimax_approx(Activation::Sine, -0.1, 0.1);
    EXPECT_NEAR(a.alpha, std::sin(0.1) / 0.1, 1e-15);
    EXPECT_NEAR(a.alpha, 0.99833, 1e-5);
    EXPECT_LT(a.gamma, 2e-4);
    double mx = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double x = -0.1 + 0.2 * i / 200000.0;
        mx = std::max(mx, std::fabs(std::sin(x) - a.alpha * x - a.beta));
    }
    EXPECT_NEAR(mx, a.gamma, 1e-12);
}

TEST(Minimax, DegenerateInterval)
{
    for (Activation act : {Activation::Sine, Activation::ReLU, Activation::ELU}) {
        const LinearApprox a = minimax_approx(act, -0.7, -0.7);
        EXPECT_EQ(a.gamma, 0.0);
        EXPECT_EQ(a.alpha * -0.7 + a.beta, activation_ref(act, -0.7));
    }
}

TEST(Minimax, InvalidIntervalRejected)
{
    EXPECT_THROW(minimax_approx(Activation::ReLU, 1, 0), ContractError);
    EXPECT_THROW(minimax_approx(Activation::ReLU, 0, INFINITY), ContractError);
}

// Over random intervals the error is bounded by gamma and reaches +gamma and -gamma.
TEST(Minimax, EquioscillatesOnRandomIntervals)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> c(-6, 6), w(1e-3, 4);
    for (Activation act : {Activation::Sine, Activation::ReLU, Activation::ELU}) {
        int nonlinear = 0;
        for (int trial = 0; trial < 300; ++trial) {
            const double lo = c(rng), hi = lo + w(rng);
            const LinearApprox a = minimax_approx(act, lo, hi);
            ASSERT_GE(a.gamma, 0.0);
            std::vector<double> xs;
            const int n = 200000;
            for (int i = 0; i <= n; ++i) xs.push_back(lo + (hi - lo) * i / n);
            // Interior extremes of f(x) - alpha x.
            if (act == Activation::ReLU) xs.push_back(0.0);
            if (act == Activation::ELU && a.alpha > 0) xs.push_back(std::log(a.alpha));
            if (act == Activation::Sine && std::fabs(a.alpha) <= 1)
                for (int k = -3; k <= 3; ++k)
                    for (double base : {std::acos(a.alpha), -std::acos(a.alpha)}) xs.push_back(base + 2 * std::numbers::pi * k);
            double emax = -INFINITY, emin = INFINITY;
            for (double x : xs) {
                if (x < lo || x > hi) continue;
                const double e = activation_ref(act, x) - a.alpha * x - a.beta;
                emax = std::max(emax, e);
                emin = std::min(emin, e);
            }
            EXPECT_LE(emax, a.gamma + 1e-12) << to_string(act) << " [" << lo << "," << hi << "]";
            EXPECT_GE(emin, -a.gamma - 1e-12) << to_string(act) << " [" << lo << "," << hi << "]";
            if (a.gamma > 1e-9) {
                ++nonlinear;
                EXPECT_NEAR(emax, a.gamma, 1e-9) << to_string(act) << " [" << lo << "," << hi << "]";
                EXPECT_NEAR(emin, -a.gamma, 1e-9) << to_string(act) << " [" << lo << "," << hi << "]";
            }
        }
        EXPECT_GT(nonlinear, 50) << to_string(act);
    }
}

TEST(ApplyActivation, ConstantFormStaysConstant)
{
    FormVector x;
    x.forms.resize(1);
    x.forms[0].center = 5.0;
    const FormVector y = apply_activation(x, Activation::ReLU, RaVariant::full());
    EXPECT_EQ(y.forms[0].center, 5.0);
    EXPECT_TRUE(y.forms[0].terms.empty());
    EXPECT_EQ(y.next_symbol, 0u);
}

TEST(ApplyActivation, ReluFullAddsFreshSymbol)
{
    const double lo[] = {-1}, hi[] = {1};
    const FormVector y = apply_activation(region_to_forms(lo, hi), Activation::ReLU, RaVariant::full());
    const AffineForm& f = y.forms[0];
    EXPECT_EQ(y.next_symbol, 2u);
    EXPECT_EQ(f.center, 0.25);
    EXPECT_EQ(f.coeff(0), 0.5);
    EXPECT_NEAR(f.coeff(1), 0.25, 1e-14);
    EXPECT_NEAR(f.range().lo, -0.5, 1e-14);
    EXPECT_NEAR(f.range().hi, 1.0, 1e-14);
    EXPECT_TRUE(f.range().contains(Interval{0, 1}));
}

TEST(ApplyActivation, ReluFixedAccumulates)
{
    const double lo[] = {-1}, hi[] = {1};
    const FormVector full = apply_activation(region_to_forms(lo, hi), Activation::ReLU, RaVariant::full());
    const FormVector fixed = apply_activation(region_to_forms(lo, hi), Activation::ReLU, RaVariant::fixed());
    EXPECT_EQ(fixed.next_symbol, 1u);
    EXPECT_EQ(fixed.forms[0].center, 0.25);
    EXPECT_EQ(fixed.forms[0].coeff(0), 0.5);
    EXPECT_NEAR(fixed.forms[0].err_accum, 0.25, 1e-14);
    EXPECT_EQ(fixed.forms[0].range(), full.forms[0].range());
}

TEST(ApplyActivation, TruncateAndAppendRespectLimits)
{
    const MlpNetwork net = random_net(Activation::Sine, {24, 24, 24}, 3);
    const Box b{{-0.2, -0.1, 0.0}, {0.1, 0.2, 0.3}, 3};
    // Truncate folds down to k; Append merges two entries per step once over budget.
    for (const RaVariant v : {RaVariant::truncate(5), RaVariant::append(6)}) {
        FormVector f = box_forms(b);
        for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
            const FormVector lin = apply_linear(f, net.layers[i]);
            f = apply_activation(lin, net.activation, v);
            for (std::size_t j = 0; j < f.forms.size(); ++j) {
                const std::size_t before = lin.forms[j].terms.size();
                const std::size_t cap = v.kind == RaVariant::Kind::Truncate ? v.limit : std::max(v.limit, before - 1);
                EXPECT_LE(f.forms[j].terms.size(), cap);
                EXPECT_GE(f.forms[j].err_accum, 0.0);
            }
        }
    }
}

TEST(ApplyActivation, FoldMovesSmallestTerms)
{
    AffineForm f;
    f.terms = {Term{0, 3.0}, Term{1, -0.5}, Term{2, 0.5}, Term{3, 2.0}};
    detail::fold_smallest(f, 2);
    ASSERT_EQ(f.terms.size(), 2u);
    EXPECT_EQ(f.terms[0].id, 0u);
    EXPECT_EQ(f.terms[1].id, 3u);
    EXPECT_EQ(f.err_accum, 1.0);
}

TEST(RaOutputRange, ConstantNetwork)
{
    const MlpNetwork net = constant_net(1.5);
    for (const RaVariant& v : all_variants(3)) EXPECT_EQ(ra_output_range(net, net.domain(), v), (Interval{1.5, 1.5}));
}

TEST(RaOutputRange, LinearLayerExact)
{
    const MlpNetwork net = linear_net(1, {2}, 1.0, {0, 0, 0}, {1, 1, 1});
    Box b{{0, 0, 0}, {1, 0, 0}, 1};
    EXPECT_EQ(ra_output_range(net, b, RaVariant::full()), (Interval{1, 3}));
}

TEST(RaOutputRange, RegionDimensionMismatch)
{
    const MlpNetwork net = linear_net(3, {1, 1, 1}, 0.0);
    Box b{{0, 0, 0}, {1, 1, 0}, 2};
    EXPECT_THROW(ra_output_range(net, b, RaVariant::full()), ContractError);
    EXPECT_THROW(ra_output_range(net, net.domain(), RaVariant::truncate(2)), ContractError);
}

// Exact image of a single affine layer over a box is c0 +- sum |w_d| h_d.
TEST(RaOutputRange, LinearExactnessOnRandomLayers)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (int t = 0; t < 200; ++t) {
        const std::vector<double> w{n01(rng), n01(rng), n01(rng)};
        const MlpNetwork net = linear_net(3, w, n01(rng));
        const Box b = random_subbox(net, rng, 0.01, 1.0);
        double c = net.layers[0].bias[0], r = 0.0;
        for (std::size_t d = 0; d < 3; ++d) {
            c += w[d] * 0.5 * (b.lower[d] + b.upper[d]);
            r += std::fabs(w[d]) * 0.5 * (b.upper[d] - b.lower[d]);
        }
        for (const RaVariant& v : all_variants(3)) {
            const Interval got = ra_output_range(net, b, v);
            EXPECT_NEAR(got.lo, c - r, 1e-12);
            EXPECT_NEAR(got.hi, c + r, 1e-12);
        }
    }
}

// Three ReLU layers whose pre-activations stay positive are globally linear.
TEST(RaOutputRange, LinearExactnessThroughInactiveKinks)
{
    MlpNetwork net;
    net.activation = Activation::ReLU;
    net.layers = {layer(2, 3, {1, 0.5, -0.25, 0.2, 1, 0.3}, {10, 10}), layer(2, 2, {0.5, 0.25, -0.125, 1}, {5, 5}),
                  layer(1, 2, {2, -3}, {0.5})};
    const Box b{{-1, -0.5, 0}, {1, 0.5, 0.5}, 3};
    // Composite weights and bias by hand.
    const double w1[2][3] = {{1, 0.5, -0.25}, {0.2, 1, 0.3}};
    const double w2[2][2] = {{0.5, 0.25}, {-0.125, 1}};
    const double w3[2] = {2, -3};
    double g[3] = {0, 0, 0}, c = 0.5;
    for (int i = 0; i < 2; ++i) {
        double row_w[3] = {0, 0, 0}, row_b = 5;
        for (int j = 0; j < 2; ++j) {
            row_b += w2[i][j] * 10;
            for (int d = 0; d < 3; ++d) row_w[d] += w2[i][j] * w1[j][d];
        }
        c += w3[i] * row_b;
        for (int d = 0; d < 3; ++d) g[d] += w3[i] * row_w[d];
    }
    double c0 = c, r = 0.0;
    for (int d = 0; d < 3; ++d) {
        c0 += g[d] * 0.5 * (b.lower[d] + b.upper[d]);
        r += std::fabs(g[d]) * 0.5 * (b.upper[d] - b.lower[d]);
    }
    for (const RaVariant& v : all_variants(3)) {
        const Interval got = ra_output_range(net, b, v);
        EXPECT_NEAR(got.lo, c0 - r, 1e-12);
        EXPECT_NEAR(got.hi, c0 + r, 1e-12);
    }
}

TEST(RaOutputRange, SoundOnRandomNetworks)
{
    std::mt19937_64 rng(23);
    int containment_misses = 0, containment_checks = 0;
    for (Activation act : {Activation::Sine, Activation::ReLU, Activation::ELU}) {
        const MlpNetwork net = random_net(act, {16, 16, 16}, 40 + static_cast<int>(act));
        for (int t = 0; t < 60; ++t) {
            const Box b = random_subbox(net, rng);
            const Interval full = ra_output_range(net, b, RaVariant::full());
            const double slack = 1e-9 * full.width();
            for (int s = 0; s < 2000; ++s) {
                const double v = sample_value(net, b, rng);
                ASSERT_GE(v, full.lo - slack) << to_string(act);
                ASSERT_LE(v, full.hi + slack) << to_string(act);
            }
            for (const RaVariant& v : all_variants(3)) {
                const Interval r = ra_output_range(net, b, v);
                for (int s = 0; s < 200; ++s) {
                    const double x = sample_value(net, b, rng);
                    ASSERT_GE(x, r.lo - slack) << to_string(act);
                    ASSERT_LE(x, r.hi + slack) << to_string(act);
                }
                containment_misses += !r.contains(full);
                ++containment_checks;
            }
        }
    }
    // Folding widens one layer's interval, but a wider interval can change the next minimax slope,
    // so a variant's range occasionally pokes inside Full's. It stays rare.
    EXPECT_LT(containment_misses * 10, containment_checks);
}

TEST(RaOutputRange, DenseEngineMatchesFormOperations)
{
    std::mt19937_64 rng(31);
    for (Activation act : {Activation::Sine, Activation::ReLU, Activation::ELU}) {
        const MlpNetwork net = random_net(act, {12, 20, 12}, 70 + static_cast<int>(act));
        for (int t = 0; t < 20; ++t) {
            const Box b = random_subbox(net, rng);
            for (const RaVariant& v : all_variants(3)) {
                const AffineForm ref = chain_forms(net, b, v);
                const AffineForm got = ra_output_form(net, AffineRegion::from_box(b), v);
                const double tol = 1e-12 * std::max(1.0, ref.radius());
                EXPECT_NEAR(got.center, ref.center, tol);
                EXPECT_NEAR(got.err_accum, ref.err_accum, tol);
                EXPECT_NEAR(got.radius(), ref.radius(), tol);
                // Symbol labels differ (one fresh column per neuron), but their order is the same.
                ASSERT_EQ(got.terms.size(), ref.terms.size());
                for (std::size_t i = 0; i < ref.terms.size(); ++i) {
                    if (i > 0) EXPECT_LT(got.terms[i - 1].id, got.terms[i].id);
                    if (ref.terms[i].id < 3) EXPECT_EQ(got.terms[i].id, ref.terms[i].id);
                    EXPECT_NEAR(got.terms[i].coeff, ref.terms[i].coeff, tol);
                }
            }
        }
    }
}

TEST(RaOutputRange, SegmentRegionIsSound)
{
    const MlpNetwork net = random_net(Activation::Sine, {16, 16}, 5);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 100; ++t) {
        const Vec3 c{0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
        const Vec3 h{0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng)};
        const Interval r = ra_output_range(net, AffineRegion::segment(c, h), RaVariant::full());
        for (int s = 0; s <= 200; ++s) {
            const double e = -1.0 + s / 100.0;
            const double v = forward(net, c + e * h);
            EXPECT_GE(v, r.lo - 1e-9 * r.width());
            EXPECT_LE(v, r.hi + 1e-9 * r.width());
        }
    }
}

// Informational: bisecting a region should not widen the bound on smooth nets.
TEST(RaOutputRange, SplittingUsuallyShrinks)
{
    const MlpNetwork net = random_net(Activation::Sine, {16, 16}, 9);
    std::mt19937_64 rng(10);
    int widened = 0;
    for (int t = 0; t < 200; ++t) {
        const Box b = random_subbox(net, rng);
        const double whole = ra_output_range(net, b, RaVariant::full()).width();
        Box l = b, r = b;
        l.upper[0] = r.lower[0] = 0.5 * (b.lower[0] + b.upper[0]);
        if (ra_output_range(net, l, RaVariant::full()).width() > whole ||
            ra_output_range(net, r, RaVariant::full()).width() > whole)
            ++widened;
    }
    if (widened) std::printf("[info] bisection widened the bound on %d of 200 regions\n", widened);
    EXPECT_LT(widened, 20);
}
