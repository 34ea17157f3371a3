#include <doctest.h>

#include <cmath>

#include "mclink/errors.hpp"
#include "mclink/receiver.hpp"

using namespace mclink;

namespace {

const FlowEnv kEnv{0.002, 1e-9, 1e-8, std::nullopt, std::nullopt};
const GaussPulse kPulse{3.0, 2.0, 0.25};

ReceiverDesign reference_design(double thl = 0.5, double amp = 9.0) {
    ReceiverDesign d;
    d.L_T = 80e-6;
    d.L_C = 20e-6;
    d.L_4 = 520e-6;
    d.L_5 = 470e-6;
    d.C_ThL_VI = thl;
    d.C_Amp_VII = amp;
    d.k = 400.0;
    return d;
}

const Eigen::ArrayXd kGrid = time_grid(0.0, 6.0, 1e-3);

bool two_valued(const TimeSeries& s, double plateau) {
    return (s.c() == 0.0 || s.c() == plateau).all();
}

}  // namespace

TEST_CASE("T-junction halves pulse and threshold and delays by the branch transit") {
    const auto d = reference_design();
    const auto tj = t_junction_outlet(d, kEnv, kPulse);
    CHECK(tj.delay == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(tj.pulse.C0 == 1.5);
    CHECK(tj.pulse.mu == doctest::Approx(2.05));
    CHECK(tj.pulse.sigma2 == kPulse.sigma2);
    CHECK(tj.threshold == 0.25);
    CHECK(receiver_delay(d, kEnv) == doctest::Approx(0.555).epsilon(1e-14));
}

TEST_CASE("receiver design validation") {
    auto d = reference_design();
    d.L_4 = -1e-6;
    CHECK_THROWS_AS(validate(d), ConfigError);
    d = reference_design();
    d.amp_dilution = 0.0;
    CHECK_THROWS_AS(validate(d), ConfigError);
}

TEST_CASE("output is two-valued at amp_dilution times C_Amp") {
    for (const double amp : {3.0, 6.0, 9.0}) {
        const auto d = reference_design(0.5, amp);
        for (const Method m : {Method::appro1, Method::appro2}) {
            const auto out = demodulate(d, kEnv, kPulse, m, kGrid);
            CHECK(out.peak() == amp / 3.0);
            CHECK(two_valued(out, amp / 3.0));
        }
    }
}

TEST_CASE("output width shrinks as the threshold rises") {
    double prev = 1e9;
    for (const double thl : {0.25, 0.5, 1.0, 2.0}) {
        const double w = demodulate(reference_design(thl), kEnv, kPulse, Method::appro1, kGrid).width_above(0.0);
        CHECK(w > 0.0);
        CHECK(w < prev);
        prev = w;
    }
}

TEST_CASE("threshold above the pulse peak yields identically zero output") {
    const double peak = kPulse.peak();
    for (const Method m : {Method::appro1, Method::appro2}) {
        const auto d = reference_design(peak * 1.01);
        CHECK((reaction4_outlet(d, kEnv, kPulse, m, kGrid).c() == 0.0).all());
        CHECK((demodulate(d, kEnv, kPulse, m, kGrid).c() == 0.0).all());
    }
    // Just below the peak the pulse is still recovered.
    const auto out = demodulate(reference_design(peak * 0.9), kEnv, kPulse, Method::appro1, kGrid);
    CHECK(out.peak() == 3.0);
}

TEST_CASE("output window follows the residual shifted by the Reaction V transit") {
    const auto d = reference_design();
    const auto res = reaction4_outlet(d, kEnv, kPulse, Method::appro1, kGrid);
    const auto out = reaction5_output(d, kEnv, res);
    const auto rs = res.support(d.presence_tau);
    const auto os = out.support(0.0);
    REQUIRE(rs.has_value());
    REQUIRE(os.has_value());
    const double shift = (d.L_C + d.L_5) / kEnv.v_eff;
    CHECK(os->first == doctest::Approx(rs->first + shift).epsilon(1e-3));
    CHECK(os->second == doctest::Approx(rs->second + shift).epsilon(1e-3));
}

TEST_CASE("finite-difference receiver agrees with the analytic receiver") {
    const auto d = reference_design();
    Eigen::ArrayXd c(kGrid.size());
    for (Eigen::Index i = 0; i < kGrid.size(); ++i) c[i] = kPulse(kGrid[i]);
    const TimeSeries received(kGrid, c, 0.0, Source::analytical, "Y");
    const auto orc = receiver_oracle(d, kEnv, received, 2e-6);
    const auto res = reaction4_outlet(d, kEnv, kPulse, Method::appro1, kGrid);
    const auto out = reaction5_output(d, kEnv, res);

    double err = 0.0;
    for (Eigen::Index i = 0; i < kGrid.size(); ++i)
        err = std::max(err, std::abs(res.c()[i] - orc.residual.at(kGrid[i])));
    CHECK(err <= 0.1 * res.peak());

    const double plateau = d.amp_dilution * d.C_Amp_VII;
    const double w_ana = out.width_above(0.0);
    const double w_orc = orc.output.resample(kGrid).width_above(0.5 * plateau);
    CHECK(std::abs(w_orc - w_ana) <= 0.1 * w_ana);
    CHECK(orc.output.peak() == doctest::Approx(plateau).epsilon(0.02));
    // Y is a catalyst in Reaction V and is carried through unchanged apart from dispersion.
    CHECK(orc.catalyst_out.peak() <= orc.residual.peak() + 1e-9);
    CHECK(orc.catalyst_out.peak() > 0.9 * orc.residual.peak());
}
