#include <catch_amalgamated.hpp>

#include <random>

#include <slackhop/actuation.hpp>

using namespace slackhop;
using Catch::Approx;

TEST_CASE("motor constants", "[actuation]") {
    MotorParams m;
    CHECK(m.kt == Approx(0.083).margin(5e-4));
    CHECK(m.gear_knee == Approx(10.417).margin(1e-3));
    CHECK(m.joint_torque_limit(Joint::knee) == Approx(13.54).margin(0.01));
    CHECK(m.joint_torque_limit(Joint::hip) == Approx(6.5));
}

TEST_CASE("joint_torque clamps to the geared rating", "[actuation]") {
    MotorParams m;
    CHECK(joint_torque(m, 4.0, Joint::knee) == 4.0);
    CHECK(joint_torque(m, 20.0, Joint::knee) == Approx(1.3 * 5.0 * 25.0 / 12.0));
    CHECK(joint_torque(m, -20.0, Joint::knee) == Approx(-1.3 * 5.0 * 25.0 / 12.0));
    CHECK(joint_torque(m, 0.0, Joint::hip) == 0.0);
}

TEST_CASE("electrical_power cases", "[actuation]") {
    MotorParams m;
    CHECK(electrical_power(m, 0.0, 50.0, Joint::knee) == 0.0);

    // Stall: Joule heat only.
    const double tau_m = 4.0 / m.gear_knee;
    CHECK(tau_m == Approx(0.384).margin(1e-3));
    CHECK(electrical_power(m, 4.0, 0.0, Joint::knee) == Approx((tau_m / m.kt) * (tau_m / m.kt) * m.R));

    // Shaft power only.
    MotorParams r0 = m;
    r0.R = 0.0;
    r0.gear_hip = 1.0;
    CHECK(electrical_power(r0, 0.4, 10.0, Joint::hip) == Approx(4.0));
}

TEST_CASE("no regeneration by default", "[actuation]") {
    MotorParams m;
    m.R = 0.0;
    CHECK(electrical_power(m, 2.0, -5.0, Joint::hip) == 0.0);
    m.allow_regen = true;
    CHECK(electrical_power(m, 2.0, -5.0, Joint::hip) == Approx(-10.0));
}

TEST_CASE("electrical power properties", "[actuation][property]") {
    MotorParams m;
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> tau(-13.0, 13.0), w(-40.0, 40.0);
    for (int i = 0; i < 2000; ++i) {
        const double t = tau(rng), om = w(rng);
        for (Joint j : {Joint::hip, Joint::knee}) {
            CHECK(electrical_power(m, t, om, j) >= 0.0);
            // Joule term is even in torque.
            const double g = m.gear(j);
            const double mech_p = std::max(0.0, (t / g) * (om * g));
            const double mech_n = std::max(0.0, (-t / g) * (om * g));
            CHECK(electrical_power(m, t, om, j) - electrical_power(m, -t, om, j) ==
                  Approx(mech_p - mech_n).margin(1e-9));
            CHECK(electrical_power(m, t, om, j) ==
                  Approx(mech_p + joule_factor(m, t, j) * m.R).epsilon(1e-12).margin(1e-12));
        }
    }
}

TEST_CASE("motor validation", "[actuation]") {
    MotorParams m;
    m.gear_hip = 0.5;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = MotorParams{};
    m.R = -1.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
}
